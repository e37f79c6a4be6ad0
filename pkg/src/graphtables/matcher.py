"""Pattern matching for MATCH statements.

The evaluator walks each pattern chain left to right, binding identifiers as
it goes and undoing bindings on backtrack.  Quantified path patterns iterate
their inner chain; identifiers that were unbound when the quantifier was
entered accumulate one value per iteration and come out as arrays.  Repetition
modes prune during traversal (a post-filter would not terminate on cyclic
data); the default rule refuses to reuse an edge within one quantified
expansion, which bounds every walk by the edge count.

Completed bindings are filtered by WHERE, deduplicated on the statement's
identifiers, narrowed by SHORTEST/ANY if requested, and finally projected,
returned as a table, or fed to the dependent statements.
"""

from __future__ import annotations

import heapq

from . import catalog as cat
from . import values as val
from .engine import ResultTable
from .errors import ExecutionError
from .exprs import eval_expr, eval_predicate
from .storage import Row, Transaction
from .syntax import (EdgePattern, Literal, MatchStatement, NodePattern,
                     PathPattern, Ref, ReturnStatement)


def run_match(tx: Transaction, stmt: MatchStatement):
    return _Matcher(tx, stmt).run()


def chain_names(elements) -> list[str]:
    """Identifiers a chain can bind, in source order: aliases plus bare
    identifiers in doc value position."""
    out: list[str] = []
    seen: set[str] = set()

    def add(name):
        if name and name not in seen:
            seen.add(name)
            out.append(name)

    def walk(element):
        if isinstance(element, PathPattern):
            for e in element.chain:
                walk(e)
            return
        add(element.alias)
        for _name, expr in element.doc or ():
            if isinstance(expr, Ref) and len(expr.path) == 1:
                add(expr.path[0])

    for element in elements:
        walk(element)
    return out


def statement_names(stmt: MatchStatement) -> list[str]:
    out: list[str] = []
    seen: set[str] = set()
    for item in stmt.items:
        if item.path_alias and item.path_alias not in seen:
            seen.add(item.path_alias)
            out.append(item.path_alias)
        for name in chain_names(item.chain):
            if name not in seen:
                seen.add(name)
                out.append(name)
    return out


def _canon(v):
    if isinstance(v, Row):
        return ("#row", v.uid)
    if isinstance(v, list):
        return ("#arr", tuple(_canon(x) for x in v))
    if isinstance(v, bool):
        return ("#bool", v)
    return v


class _Matcher:
    def __init__(self, tx: Transaction, stmt: MatchStatement):
        self.tx = tx
        self.view = tx.view()
        self.catalog = tx.catalog
        self.stmt = stmt
        self.bindings: dict[str, object] = {}
        self.trace: list[tuple[str, int]] = []
        self.marks: list[int] = []
        self.rep_mode: str | None = None
        self.edge_count = 0
        self.emissions: list[list] = []  # [bindings dict, edge count]

    # --- drive ---

    def run(self):
        self._run_items(0)
        columns = [n for n in statement_names(self.stmt)
                   if any(n in b for b, _ in self.emissions)] if self.emissions else \
                  statement_names(self.stmt)
        kept = self._dedup_and_select(columns)
        dependent = self.stmt.dependent
        if isinstance(dependent, ReturnStatement):
            table = self._project(dependent, kept)
            self._run_effects(None, kept)
            return table
        if dependent is not None or self.stmt.then_block:
            self._run_effects(dependent, kept)
            return None
        return ResultTable(columns, [[b.get(c) for c in columns] for b, _ in kept])

    def _run_items(self, i: int) -> None:
        if i == len(self.stmt.items):
            self._emit()
            return
        item = self.stmt.items[i]
        chain = item.chain
        pairs = [(chain[k], chain[k + 1]) for k in range(1, len(chain), 2)]
        first = chain[0]
        saved = (self.trace, self.marks, self.rep_mode)
        self.trace, self.marks, self.rep_mode = [], [], item.rep_mode
        for row in self._node_candidates(first):
            added: list[str] = []
            self.trace.append(("node", row.uid))
            if self._unify_node(first, row, added):
                for last in self._walk(pairs, 0, row):
                    if not self._item_ok():
                        continue
                    p_added: list[str] = []
                    if item.path_alias is None or self._bind_path(item.path_alias, p_added):
                        self._run_items(i + 1)
                    for a in p_added:
                        del self.bindings[a]
            for a in added:
                del self.bindings[a]
            self.trace.pop()
        self.trace, self.marks, self.rep_mode = saved

    def _emit(self) -> None:
        if self.stmt.where is not None and not eval_predicate(self.stmt.where, self._resolve):
            return
        self.emissions.append([dict(self.bindings), self.edge_count])

    def _item_ok(self) -> bool:
        if self.rep_mode != "SIMPLE":
            return True
        nodes = [uid for kind, uid in self.trace if kind == "node"]
        edges = sum(1 for kind, _ in self.trace if kind == "edge")
        if edges == 0 or nodes[0] != nodes[-1]:
            return False
        interior = nodes[:-1]
        return len(set(interior)) == len(interior)

    def _bind_path(self, name: str, added: list[str]) -> bool:
        if name in self.bindings:
            return False
        self.bindings[name] = [self.view.get_row(uid) for _kind, uid in self.trace]
        added.append(name)
        return True

    # --- chain traversal ---

    def _walk(self, pairs, idx: int, crow: Row):
        if idx == len(pairs):
            yield crow
            return
        connector, follow = pairs[idx]
        if isinstance(connector, EdgePattern):
            yield from self._hop(connector, follow, pairs, idx, crow)
        else:
            yield from self._quantified(connector, follow, pairs, idx, crow)

    def _hop(self, epat: EdgePattern, follow: NodePattern, pairs, idx, crow):
        etids = self._edge_tids(epat.labels)
        if etids is not None and not etids:
            return
        side = "leaving" if epat.direction == "out" else "arriving"
        for erow, luid, auid in self.view.edges_adjacent(crow, side, etids):
            if not self._edge_allowed(erow.uid):
                continue
            tuid = auid if epat.direction == "out" else luid
            if not self._node_allowed(tuid):
                continue
            trow = self.view.get_row(tuid)
            if trow is None:
                continue
            added: list[str] = []
            self.trace.append(("edge", erow.uid))
            self.trace.append(("node", tuid))
            self.edge_count += 1
            if self._unify_edge(epat, erow, added) and self._unify_node(follow, trow, added):
                yield from self._walk(pairs, idx + 1, trow)
            for a in added:
                del self.bindings[a]
            self.trace.pop()
            self.trace.pop()
            self.edge_count -= 1

    def _edge_allowed(self, euid: int) -> bool:
        if self.rep_mode == "TRAIL":
            if ("edge", euid) in self.trace:
                return False
        if self.marks and ("edge", euid) in self.trace[self.marks[0]:]:
            return False
        return True

    def _node_allowed(self, tuid: int) -> bool:
        if self.rep_mode == "ACYCLIC":
            return ("node", tuid) not in self.trace
        if self.rep_mode == "SIMPLE":
            if ("node", tuid) in self.trace and tuid != self.trace[0][1]:
                return False
        return True

    # --- quantifiers ---

    def _quantified(self, path: PathPattern, follow: NodePattern, pairs, idx, crow):
        inner = path.chain
        inner_pairs = [(inner[k], inner[k + 1]) for k in range(1, len(inner), 2)]
        loop_aliases = [n for n in chain_names(inner) if n not in self.bindings]
        arrays: dict[str, list] = {a: [] for a in loop_aliases}
        self.marks.append(len(self.trace))
        try:
            yield from self._q_iter(path, follow, pairs, idx, inner[0], inner_pairs,
                                    loop_aliases, arrays, 0, crow)
        finally:
            self.marks.pop()

    def _q_stop(self, follow, pairs, idx, loop_aliases, arrays, crow):
        """Leave the quantifier: bind the accumulated arrays and go on."""
        mark = self.marks.pop()
        added: list[str] = []
        for a in loop_aliases:
            self.bindings[a] = list(arrays[a])
            added.append(a)
        if self._unify_node(follow, crow, added):
            yield from self._walk(pairs, idx + 1, crow)
        for a in added:
            del self.bindings[a]
        self.marks.append(mark)

    def _q_iter(self, path, follow, pairs, idx, first_pat, inner_pairs,
                loop_aliases, arrays, count, crow):
        if count >= path.lo:
            yield from self._q_stop(follow, pairs, idx, loop_aliases, arrays, crow)
        if path.hi is not None and count >= path.hi:
            return
        before = len(self.trace)
        added0: list[str] = []
        if self._unify_node(first_pat, crow, added0):
            for last in self._walk(inner_pairs, 0, crow):
                vals: dict[str, object] = {}
                for a in loop_aliases:
                    if a in self.bindings:
                        vals[a] = self.bindings.pop(a)
                    arrays[a].append(vals.get(a))
                if len(self.trace) > before:
                    yield from self._q_iter(path, follow, pairs, idx, first_pat,
                                            inner_pairs, loop_aliases, arrays,
                                            count + 1, last)
                elif count + 1 >= path.lo:
                    # an iteration that consumed nothing cannot be stacked,
                    # but it may still satisfy the count
                    yield from self._q_stop(follow, pairs, idx, loop_aliases,
                                            arrays, last)
                for a in loop_aliases:
                    arrays[a].pop()
                    if a in vals:
                        self.bindings[a] = vals[a]
        for a in added0:
            del self.bindings[a]

    # --- candidates and unification ---

    def _node_tids(self, labels) -> set[int]:
        if not labels:
            return {d.type_id for d in self.catalog.types(cat.KIND_NODE)}
        out: set[int] | None = None
        for label in labels:
            desc = self.catalog.lookup_label(label, cat.KIND_NODE)
            if desc is None:
                return set()
            closure = set(self.catalog.subtype_closure(desc.type_id))
            out = closure if out is None else out & closure
        return out or set()

    def _edge_tids(self, labels) -> list[int] | None:
        if not labels:
            return None
        out: set[int] | None = None
        for label in labels:
            desc = self.catalog.lookup_label(label, cat.KIND_EDGE)
            if desc is None:
                return []
            closure = set(self.catalog.subtype_closure(desc.type_id))
            out = closure if out is None else out & closure
        return sorted(out or ())

    def _node_candidates(self, pattern: NodePattern):
        if pattern.alias is not None and pattern.alias in self.bindings:
            v = self.bindings[pattern.alias]
            if isinstance(v, Row) and self.catalog.get(v.type_id).kind == cat.KIND_NODE:
                yield v
            return
        tids = self._node_tids(pattern.labels)
        if not tids:
            return
        for name, expr in pattern.doc or ():
            if isinstance(expr, Literal) and expr.value is not None:
                yield from self.view.lookup_by_value(sorted(tids), name, expr.value)
                return
        streams = [self.view.scan_type(t, subtypes=False) for t in sorted(tids)]
        yield from heapq.merge(*streams, key=lambda r: r.uid)

    def _unify_node(self, pattern: NodePattern, row: Row, added: list[str]) -> bool:
        if pattern.alias is not None:
            if pattern.alias in self.bindings:
                bound = self.bindings[pattern.alias]
                if not (isinstance(bound, Row) and bound.uid == row.uid):
                    return False
            else:
                self.bindings[pattern.alias] = row
                added.append(pattern.alias)
        for label in pattern.labels:
            desc = self.catalog.lookup_label(label, cat.KIND_NODE)
            if desc is None or row.type_id not in self.catalog.subtype_closure(desc.type_id):
                return False
        if pattern.doc and not self._unify_doc(pattern.doc, row, added):
            return False
        if pattern.where is not None and not eval_predicate(pattern.where, self._resolve):
            return False
        return True

    def _unify_edge(self, pattern: EdgePattern, row: Row, added: list[str]) -> bool:
        if pattern.alias is not None:
            if pattern.alias in self.bindings:
                bound = self.bindings[pattern.alias]
                if not (isinstance(bound, Row) and bound.uid == row.uid):
                    return False
            else:
                self.bindings[pattern.alias] = row
                added.append(pattern.alias)
        if pattern.doc and not self._unify_doc(pattern.doc, row, added):
            return False
        if pattern.where is not None and not eval_predicate(pattern.where, self._resolve):
            return False
        return True

    def _unify_doc(self, doc, row: Row, added: list[str]) -> bool:
        for name, expr in doc:
            prop = row.values.get(name)
            if isinstance(expr, Ref) and len(expr.path) == 1 and expr.path[0] not in self.bindings:
                if prop is None:
                    return False
                self.bindings[expr.path[0]] = prop
                added.append(expr.path[0])
                continue
            v = eval_expr(expr, self._resolve)
            if prop is None or v is None or not val.values_equal(v, prop):
                return False
        return True

    def _resolve(self, path):
        return _resolve_in(self.view, self.bindings, path)

    # --- results ---

    def _dedup_and_select(self, columns):
        seen: dict[tuple, list] = {}
        order: list[list] = []
        for b, edges in self.emissions:
            key = tuple(_canon(b.get(c)) for c in columns)
            rec = seen.get(key)
            if rec is None:
                rec = [b, edges]
                seen[key] = rec
                order.append(rec)
            elif edges < rec[1]:
                rec[1] = edges
        sel = self.stmt.items[0].sel_mode if self.stmt.items else None
        if sel == "SHORTEST" and order:
            best = min(rec[1] for rec in order)
            order = [rec for rec in order if rec[1] == best]
        elif sel == "ANY" and order:
            order = order[:1]
        return order

    def _project(self, ret: ReturnStatement, kept) -> ResultTable:
        headers = [header for header, _ in ret.items]
        rows = []
        for b, _edges in kept:
            resolve = _resolver_for(self.view, b)
            rows.append([eval_expr(expr, resolve) for _h, expr in ret.items])
        return ResultTable(headers, rows)

    def _run_effects(self, dependent, kept) -> None:
        from . import executor
        for b, _edges in kept:
            scope = dict(b)
            if dependent is not None and not isinstance(dependent, ReturnStatement):
                executor.run_statement(self.tx, dependent, scope)
            for stmt in self.stmt.then_block:
                executor.run_statement(self.tx, stmt, scope)


def _resolver_for(view, bindings: dict):
    def resolve(path):
        return _resolve_in(view, bindings, path)
    return resolve


def _resolve_in(view, bindings: dict, path):
    name = path[0]
    if name not in bindings:
        raise ExecutionError(f"unknown identifier {name}")
    v = bindings[name]
    if len(path) == 1:
        return v
    if isinstance(v, Row):
        row = view.get_row(v.uid) or v
        return row.values.get(path[1])
    raise ExecutionError(f"{name} has no fields")
