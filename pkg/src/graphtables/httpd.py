"""Read-only HTTP service: one GET shape that returns the anchor node's
graph component as JSON.

    GET /{db}/{role}/{NodeType}/{COL}='{value}'?NODE[&depth=k]

The role segment is accepted and ignored.  The response lists the component's
nodes and edges (uid ascending) plus the component representative; `depth`
trims the component to a breadth-first neighborhood of the anchor.
"""

from __future__ import annotations

import json
import threading
import urllib.parse
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from . import catalog as cat
from . import values as val
from .catalog import ARRIVING, LEAVING
from .engine import Database
from .errors import GraphTablesError
from .lexer import tokenize

DEFAULT_PORT = 8180


def parse_anchor_value(text: str):
    """The {COL}='{value}' right-hand side: a quoted string or a bare
    literal in statement syntax."""
    tokens = tokenize(text)
    if len(tokens) != 2:  # literal + end marker
        raise ValueError("anchor value must be a single literal")
    tok = tokens[0]
    if tok.type in ("string", "int", "decimal", "date", "currency"):
        return tok.value
    raise ValueError(f"unsupported anchor value {text!r}")


def _subgraph(db: Database, anchor_uid: int, depth: int | None):
    """Node and edge uid sets for the response, captured under the commit
    lock so a concurrent writer cannot tear the component."""
    with db.commit_lock:
        component = db.graphs.component_of(anchor_uid)
        nodes = set(component.nodes)
        edges = set(component.edges)
        representative = component.representative
        ends = {e: db.store.edge_endpoints[e] for e in edges}
        seq = db.store.commit_seq
    if depth is not None:
        adjacency: dict[int, list[tuple[int, int]]] = {}
        for e, (lu, au) in ends.items():
            adjacency.setdefault(lu, []).append((e, au))
            adjacency.setdefault(au, []).append((e, lu))
        keep = {anchor_uid}
        frontier = [anchor_uid]
        for _ in range(depth):
            nxt = []
            for uid in frontier:
                for _e, other in adjacency.get(uid, ()):
                    if other not in keep:
                        keep.add(other)
                        nxt.append(other)
            frontier = nxt
        nodes &= keep
        edges = {e for e in edges if ends[e][0] in nodes and ends[e][1] in nodes}
    return nodes, edges, ends, representative, seq


def build_document(db: Database, anchor_uid: int, depth: int | None) -> dict:
    nodes, edges, ends, representative, seq = _subgraph(db, anchor_uid, depth)
    catalog = db.catalog
    node_docs = []
    for uid in sorted(nodes):
        row = db.store.visible(uid, seq)
        if row is None:
            continue
        desc = catalog.get(row.type_id)
        key = catalog.effective_key(row.type_id)
        key_value = row.values.get(key[0]) if len(key) == 1 else None
        properties = {c.name: val.http_value(row.values[c.name])
                      for c in catalog.effective_columns(row.type_id)
                      if c.name in row.values}
        node_docs.append({"uid": uid, "type": desc.label,
                          "key": val.http_value(key_value), "properties": properties})
    edge_docs = []
    for uid in sorted(edges):
        row = db.store.visible(uid, seq)
        if row is None:
            continue
        desc = catalog.get(row.type_id)
        properties = {c.name: val.http_value(row.values[c.name])
                      for c in catalog.effective_columns(row.type_id)
                      if c.name in row.values and c.name not in (LEAVING, ARRIVING)}
        edge_docs.append({"uid": uid, "type": desc.label,
                          "leaving": val.http_value(row.values.get(LEAVING)),
                          "arriving": val.http_value(row.values.get(ARRIVING)),
                          "properties": properties})
    return {"anchor": anchor_uid, "representative": representative,
            "nodes": node_docs, "edges": edge_docs}


class _Handler(BaseHTTPRequestHandler):
    db: Database  # set by make_handler

    def log_message(self, format, *args):  # noqa: A002 - stdlib signature
        pass

    def _reply(self, status: int, payload: dict) -> None:
        body = json.dumps(payload, ensure_ascii=False).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_GET(self):  # noqa: N802 - stdlib naming
        try:
            status, payload = self._handle()
        except GraphTablesError as exc:
            status, payload = 400, {"error": str(exc)}
        except Exception as exc:  # pragma: no cover - last resort
            status, payload = 500, {"error": str(exc)}
        self._reply(status, payload)

    def _handle(self):
        parsed = urllib.parse.urlsplit(self.path)
        segments = [urllib.parse.unquote(s) for s in parsed.path.split("/")]
        if len(segments) != 5 or segments[0]:
            return 400, {"error": "expected /{db}/{role}/{type}/{column}='{value}'"}
        _, db_name, _role, type_name, selector = segments
        if db_name.lower() != self.db.name.lower():
            return 404, {"error": f"unknown database {db_name}"}

        depth = None
        saw_node = False
        for key, value in urllib.parse.parse_qsl(parsed.query, keep_blank_values=True):
            if key.upper() == "NODE" and not value:
                saw_node = True
            elif key.lower() == "depth":
                try:
                    depth = int(value)
                except ValueError:
                    return 400, {"error": f"depth must be an integer, not {value!r}"}
                if depth < 0:
                    return 400, {"error": "depth must be non-negative"}
            else:
                return 400, {"error": f"unsupported query parameter {key}"}
        if not saw_node:
            return 400, {"error": "only ?NODE queries are supported"}

        if "=" not in selector:
            return 400, {"error": "anchor selector must look like COL='value'"}
        column, _, value_text = selector.partition("=")
        column = column.strip().upper()
        try:
            value = parse_anchor_value(value_text.strip())
        except (ValueError, GraphTablesError) as exc:
            return 400, {"error": str(exc)}

        desc = self.db.catalog.lookup_label(type_name.upper(), cat.KIND_NODE)
        if desc is None:
            return 404, {"error": f"unknown node type {type_name}"}
        closure = self.db.catalog.subtype_closure(desc.type_id)
        if all(self.db.catalog.effective_column(t, column) is None for t in closure):
            return 404, {"error": f"{desc.label} has no column {column}"}
        view = self.db.read_view()
        rows = view.lookup_by_value(closure, column, value)
        if not rows:
            return 404, {"error": f"no {desc.label} with {column}={value_text}"}
        return 200, build_document(self.db, rows[0].uid, depth)


def make_handler(db: Database):
    return type("BoundHandler", (_Handler,), {"db": db})


def serve(db: Database, port: int = DEFAULT_PORT) -> ThreadingHTTPServer:
    return ThreadingHTTPServer(("127.0.0.1", port), make_handler(db))


def serve_in_thread(db: Database, port: int = DEFAULT_PORT) -> ThreadingHTTPServer:
    server = serve(db, port)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    return server
