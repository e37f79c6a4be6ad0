"""Interactive shell and script runner.

Statements are one line each unless wrapped in square brackets, which may
span lines; the outer brackets are stripped before parsing.  Result tables
print in a dashed ASCII layout; successful statements without a result stay
quiet.
"""

from __future__ import annotations

import argparse
import sys
import time

from .engine import Database, ResultTable, render_row
from .errors import GraphTablesError
from .storage import Row
from . import values as val


def render_value(catalog, value) -> str:
    if isinstance(value, Row):
        return render_row(catalog, value)
    if isinstance(value, list):
        return "ARRAY[" + ",".join(render_value(catalog, v) for v in value) + "]"
    return val.render(value)


def format_table(catalog, table: ResultTable) -> str:
    if not table.columns:
        return "true" if table.rows else "false"
    cells = [[render_value(catalog, v) for v in row] for row in table.rows]
    widths = [len(c) for c in table.columns]
    for row in cells:
        for i, text in enumerate(row):
            widths[i] = max(widths[i], len(text))
    def line(parts):
        return "|" + "|".join(text.ljust(w) for text, w in zip(parts, widths)) + "|"
    dashes = "-" * (sum(widths) + len(widths) + 1)
    out = [dashes, line(table.columns), dashes]
    out.extend(line(row) for row in cells)
    out.append(dashes)
    return "\n".join(out)


def split_statements(text: str) -> list[tuple[int, str]]:
    """Break script text into (starting line number, statement) pairs.
    A leading `[` opens a bracketed block; anything else is one statement
    per line."""
    out = []
    lines = text.split("\n")
    i = 0
    while i < len(lines):
        stripped = lines[i].strip()
        if not stripped or stripped.startswith("//"):
            i += 1
            continue
        if stripped.startswith("["):
            start = i
            block = []
            depth = 0
            done = False
            while i < len(lines) and not done:
                line = lines[i]
                depth += _bracket_delta(line)
                block.append(line)
                i += 1
                if depth <= 0:
                    done = True
            body = "\n".join(block).strip()
            body = body[1:-1] if body.startswith("[") and body.endswith("]") else body
            out.append((start + 1, body))
        else:
            out.append((i + 1, stripped))
            i += 1
    return out


def _bracket_delta(line: str) -> int:
    """Net [ ] nesting change, ignoring brackets inside strings and comments."""
    delta = 0
    quote = None
    k = 0
    while k < len(line):
        ch = line[k]
        if quote:
            if ch == quote:
                if k + 1 < len(line) and line[k + 1] == quote:
                    k += 1  # doubled quote stays inside the string
                else:
                    quote = None
        elif ch in ("'", '"'):
            quote = ch
        elif ch == "/" and line[k:k + 2] == "//":
            break
        elif ch == "[":
            delta += 1
        elif ch == "]":
            delta -= 1
        k += 1
    return delta


def _print_result(db: Database, result) -> None:
    if isinstance(result, ResultTable):
        print(format_table(db.catalog, result))


def run_repl(db: Database, stdin=None, stdout=None) -> int:
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    session = db.session()
    buffer: list[str] = []
    depth = 0
    while True:
        prompt = "SQL> " if not buffer else "> "
        stdout.write(prompt)
        stdout.flush()
        line = stdin.readline()
        if not line:
            stdout.write("\n")
            return 0
        stripped = line.strip()
        if not buffer:
            if not stripped or stripped.startswith("//"):
                continue
            if stripped.lower() in ("exit", "quit"):
                return 0
            if not stripped.startswith("["):
                _execute_line(db, session, stripped, stdout)
                continue
        buffer.append(line.rstrip("\n"))
        depth += _bracket_delta(line)
        if depth <= 0:
            body = "\n".join(buffer).strip()
            if body.startswith("[") and body.endswith("]"):
                body = body[1:-1]
            buffer, depth = [], 0
            _execute_line(db, session, body, stdout)


def _execute_line(db: Database, session, text: str, stdout) -> None:
    try:
        result = session.execute(text)
    except GraphTablesError as exc:
        stdout.write(f"error: {exc}\n")
        return
    if isinstance(result, ResultTable):
        stdout.write(format_table(db.catalog, result) + "\n")


def run_script(db: Database, path: str, keep_going: bool = False,
               timing: bool = False, out=None) -> int:
    out = out or sys.stdout
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    session = db.session()
    statements = split_statements(text)
    failures = 0
    started = time.perf_counter()
    executed = 0
    for line_no, stmt_text in statements:
        t0 = time.perf_counter()
        try:
            result = session.execute(stmt_text)
            executed += 1
        except GraphTablesError as exc:
            failures += 1
            where = line_no + getattr(exc, "line", 1) - 1 if hasattr(exc, "line") else line_no
            print(f"{path}:{where}: error: {exc}", file=sys.stderr)
            if not keep_going:
                return 1
            continue
        if timing:
            out.write(f"-- {(time.perf_counter() - t0) * 1000:.3f} ms\n")
        _print_result(db, result)
    elapsed = time.perf_counter() - started
    if timing and executed:
        rate = executed / elapsed if elapsed > 0 else float("inf")
        out.write(f"{executed} statements in {elapsed:.3f} s ({rate:.0f} statements/s)\n")
    return 1 if failures else 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="graphtables",
        description="Typed graph database shell.")
    parser.add_argument("dbfile", help="commit log file; ':memory:' for a throwaway database")
    parser.add_argument("--script", metavar="FILE", help="run statements from FILE and exit")
    parser.add_argument("--time", action="store_true", help="print per-statement timing")
    parser.add_argument("--keep-going", action="store_true",
                        help="continue a script after statement errors")
    parser.add_argument("--http", type=int, metavar="PORT",
                        help="serve the read-only HTTP API on PORT")
    args = parser.parse_args(argv)

    path = None if args.dbfile == ":memory:" else args.dbfile
    db = Database(path)
    server = None
    if args.http:
        from .httpd import serve_in_thread
        server = serve_in_thread(db, args.http)
    try:
        if args.script:
            return run_script(db, args.script, keep_going=args.keep_going, timing=args.time)
        return run_repl(db)
    finally:
        if server is not None:
            server.shutdown()
        db.close()


if __name__ == "__main__":
    sys.exit(main())
