"""Statement execution: CREATE graph patterns, schema statements, SET and
DELETE.  Pattern matching lives in the matcher module; this module covers
everything that writes.

CREATE works schema-first-on-demand: an unknown node label becomes a fresh
node type with columns inferred from the doc literals, an unknown edge label
becomes an edge type whose endpoints are the adjacent patterns' types.  Later
statements widen types as new properties or broader value types appear.
"""

from __future__ import annotations

import decimal

from . import catalog as cat
from . import values as val
from .catalog import ARRIVING, ColumnDescriptor, LEAVING, Multiplicity
from .engine import ResultTable
from .errors import ExecutionError, SchemaError
from .exprs import eval_expr
from .storage import Row, Transaction
from .syntax import (AlterAddCheck, AlterAddColumn, AlterAddKey, AlterCardinality,
                     AlterDropColumn, CreateStatement, CreateTypeStatement,
                     DeleteStatement, EdgePattern, MatchStatement, NodePattern,
                     PathPattern, Ref, ReturnStatement, RoleStatement,
                     SetStatement, ShowGraphsStatement)

# SQL-ish column type names accepted in CREATE TYPE / ALTER ADD
_TYPE_NAMES = {
    "CHAR": val.STRING, "CHARACTER": val.STRING, "VARCHAR": val.STRING,
    "STRING": val.STRING, "TEXT": val.STRING,
    "INT": val.INTEGER, "INTEGER": val.INTEGER, "SMALLINT": val.INTEGER,
    "BIGINT": val.INTEGER,
    "DEC": val.DECIMAL, "DECIMAL": val.DECIMAL, "NUMERIC": val.DECIMAL,
    "NUMBER": val.DECIMAL, "FLOAT": val.DECIMAL, "REAL": val.DECIMAL,
    "DOUBLE": val.DECIMAL,
    "BOOL": val.BOOLEAN, "BOOLEAN": val.BOOLEAN,
    "DATE": val.DATE,
    "CURRENCY": val.CURRENCY, "MONEY": val.CURRENCY,
}


def run_statement(tx: Transaction, stmt, bindings: dict | None = None):
    """Execute one statement; returns a ResultTable or None."""
    if isinstance(stmt, CreateStatement):
        return exec_create(tx, stmt, bindings)
    if isinstance(stmt, MatchStatement):
        from .matcher import run_match
        return run_match(tx, stmt)
    if isinstance(stmt, CreateTypeStatement):
        return exec_create_type(tx, stmt)
    if isinstance(stmt, AlterAddKey):
        tx.alter_primary_key(stmt.table, list(stmt.columns))
        return None
    if isinstance(stmt, AlterAddColumn):
        tx.widen_type(stmt.table, _column_descriptor(tx, stmt.column, stmt.type_name))
        return None
    if isinstance(stmt, AlterDropColumn):
        tx.drop_column(stmt.table, stmt.column)
        return None
    if isinstance(stmt, AlterAddCheck):
        tx.add_constraint(stmt.table, stmt.text)
        return None
    if isinstance(stmt, AlterCardinality):
        tx.set_cardinality(stmt.table, Multiplicity(
            stmt.leaving[0], stmt.leaving[1], stmt.arriving[0], stmt.arriving[1]))
        return None
    if isinstance(stmt, SetStatement):
        exec_set(tx, stmt, bindings or {})
        return None
    if isinstance(stmt, DeleteStatement):
        exec_delete(tx, stmt, bindings or {})
        return None
    if isinstance(stmt, ReturnStatement):
        return exec_return(tx, stmt, bindings or {})
    if isinstance(stmt, RoleStatement):
        return None
    if isinstance(stmt, ShowGraphsStatement):
        rows = [[c.representative, len(c.nodes), len(c.edges)]
                for c in tx.db.graphs.components()]
        return ResultTable(["GRAPH", "NODES", "EDGES"], rows)
    raise ExecutionError(f"cannot execute {type(stmt).__name__} here")


def _column_descriptor(tx: Transaction, name: str, type_name: str) -> ColumnDescriptor:
    mapped = _TYPE_NAMES.get(type_name)
    if mapped is not None:
        return ColumnDescriptor(name, mapped)
    plain = tx.catalog.lookup_label(type_name, cat.KIND_PLAIN)
    if plain is None:
        raise SchemaError(f"unknown column type {type_name}")
    return ColumnDescriptor(name, val.STRUCTURED, struct_type_id=plain.type_id)


def _resolver(tx: Transaction, bindings: dict):
    view = tx.view()

    def resolve(path: tuple):
        alias = path[0]
        if alias not in bindings:
            raise ExecutionError(f"unknown identifier {alias}")
        bound = bindings[alias]
        if len(path) == 1:
            return bound
        if isinstance(bound, Row):
            row = view.get_row(bound.uid) or bound
            return row.values.get(path[1])
        raise ExecutionError(f"{alias} has no fields")

    return resolve


def eval_value(tx: Transaction, expr, bindings: dict):
    return eval_expr(expr, _resolver(tx, bindings))


# --- CREATE graph ---


def exec_create(tx: Transaction, stmt: CreateStatement, outer: dict | None = None):
    bindings: dict = dict(outer) if outer else {}
    edges = []
    for chain in stmt.graphs:
        previous = None
        pending_edge = None
        for element in chain:
            if isinstance(element, NodePattern):
                row = _create_node(tx, element, bindings)
                if pending_edge is not None:
                    edges.append((previous, pending_edge, row))
                    pending_edge = None
                previous = row
            elif isinstance(element, EdgePattern):
                pending_edge = element
            else:
                raise ExecutionError("quantified path patterns cannot be created")
    for tail_row, pattern, head_row in edges:
        _create_edge(tx, pattern, tail_row, head_row, bindings)
    if stmt.then is not None:
        run_statement(tx, stmt.then, bindings)
    return None


def _most_specific(tx: Transaction, labels, kind: str) -> cat.TypeDescriptor:
    """Resolve a label chain like X:Y to the most specific type; all labels
    must lie on one supertype path."""
    descs = []
    for label in labels:
        desc = tx.catalog.lookup_label(label, kind)
        if desc is None:
            raise ExecutionError(f"unknown {kind} type {label}")
        descs.append(desc)
    best = descs[0]
    for desc in descs[1:]:
        if best.type_id in tx.catalog.supertype_chain(desc.type_id):
            best = desc
        elif desc.type_id not in tx.catalog.supertype_chain(best.type_id):
            raise ExecutionError(f"labels {':'.join(labels)} are not on one subtype path")
    return best


def _eval_doc(tx: Transaction, doc, bindings: dict) -> dict:
    out = {}
    for name, expr in doc or ():
        v = eval_value(tx, expr, bindings)
        if isinstance(v, Row):
            raise ExecutionError(f"{name} cannot hold a whole row")
        out[name] = v
    return out


def _fit_properties(tx: Transaction, desc: cat.TypeDescriptor, props: dict) -> None:
    """Widen the type until every property fits: new columns are added,
    integer columns grow to decimal when fed a fractional value."""
    for name, v in props.items():
        if v is None:
            continue
        col = tx.catalog.effective_column(desc.type_id, name)
        if col is None:
            tx.widen_type(desc.type_id, ColumnDescriptor(name, val.infer_data_type(v)))
            continue
        if val.conforms(v, col.data_type):
            continue
        if col.data_type == val.INTEGER and isinstance(v, decimal.Decimal):
            owner = _column_owner(tx, desc.type_id, name)
            tx.retype_column(owner, name, val.DECIMAL)
            continue
        raise ExecutionError(f"{desc.label}.{name} holds {col.data_type} values, "
                             f"not {v!r}")


def _column_owner(tx: Transaction, type_id: int, name: str) -> int:
    owner = type_id
    for tid in tx.catalog.supertype_chain(type_id):
        if tx.catalog.get(tid).own_column(name) is not None:
            owner = tid
            break
    return owner


def _create_node(tx: Transaction, pattern: NodePattern, bindings: dict) -> Row:
    alias = pattern.alias
    if alias is not None and alias in bindings:
        bound = bindings[alias]
        if not isinstance(bound, Row):
            raise ExecutionError(f"{alias} is not a node")
        if pattern.labels:
            raise ExecutionError(f"{alias} is already bound; labels are not allowed")
        if pattern.doc:
            props = _eval_doc(tx, pattern.doc, bindings)
            _fit_properties(tx, tx.catalog.get(bound.type_id), props)
            tx.update_row(bound.uid, props)
            bindings[alias] = tx.view().get_row(bound.uid)
        return bindings[alias]
    if not pattern.labels:
        raise ExecutionError(f"({alias or ''}) does not reference a bound alias")
    props = _eval_doc(tx, pattern.doc, bindings)
    desc = _resolve_or_define_node(tx, pattern.labels, props)
    _fit_properties(tx, desc, props)
    uid = tx.insert_row(desc.type_id, props)
    row = tx.view().get_row(uid)
    if alias is not None:
        bindings[alias] = row
    return row


def _resolve_or_define_node(tx: Transaction, labels, props: dict) -> cat.TypeDescriptor:
    known = [tx.catalog.lookup_label(lbl, cat.KIND_NODE) for lbl in labels]
    if all(d is None for d in known):
        if len(labels) > 1:
            raise ExecutionError(f"cannot define {':'.join(labels)} on the fly")
        columns = [ColumnDescriptor(n, val.infer_data_type(v))
                   for n, v in props.items() if v is not None]
        return tx.define_node_type(labels[0], columns)
    if any(d is None for d in known):
        missing = [lbl for lbl, d in zip(labels, known) if d is None]
        raise ExecutionError(f"unknown node type {missing[0]}")
    return _most_specific(tx, labels, cat.KIND_NODE)


def _endpoint_key_value(tx: Transaction, edge_desc: cat.TypeDescriptor,
                        side: str, node_row: Row) -> object:
    endpoint_tid = edge_desc.leaving_type if side == LEAVING else edge_desc.arriving_type
    key = tx.catalog.effective_key(endpoint_tid)
    if len(key) != 1:
        raise ExecutionError(f"{tx.catalog.get(endpoint_tid).label} needs a "
                             "single-column key to be referenced by edges")
    v = node_row.values.get(key[0])
    if v is None:
        raise ExecutionError(f"node {node_row.uid} has no value for key column {key[0]}")
    return v


def _generalize_endpoint(tx: Transaction, edge_desc: cat.TypeDescriptor,
                         side: str, node_tid: int) -> cat.TypeDescriptor:
    declared = edge_desc.leaving_type if side == LEAVING else edge_desc.arriving_type
    if node_tid in tx.catalog.subtype_closure(declared):
        return edge_desc
    declared_chain = tx.catalog.supertype_chain(declared)
    node_chain = tx.catalog.supertype_chain(node_tid)
    common = [t for t in declared_chain if t in node_chain]
    if not common:
        raise ExecutionError(
            f"{tx.catalog.get(node_tid).label} cannot be the "
            f"{'source' if side == LEAVING else 'target'} of {edge_desc.label}")
    tx.retarget_endpoint(edge_desc.type_id, side, common[-1])
    return tx.catalog.get(edge_desc.type_id)


def _create_edge(tx: Transaction, pattern: EdgePattern, left_row: Row,
                 right_row: Row, bindings: dict) -> Row:
    if pattern.direction == "out":
        tail_row, head_row = left_row, right_row
    else:
        tail_row, head_row = right_row, left_row
    if len(pattern.labels) != 1:
        raise ExecutionError("an edge needs exactly one type label")
    label = pattern.labels[0]
    props = _eval_doc(tx, pattern.doc, bindings)
    desc = tx.catalog.lookup_label(label, cat.KIND_EDGE)
    if desc is None:
        columns = [ColumnDescriptor(n, val.infer_data_type(v))
                   for n, v in props.items() if v is not None]
        desc = tx.define_edge_type(label, columns, tail_row.type_id, head_row.type_id)
    else:
        desc = _generalize_endpoint(tx, desc, LEAVING, tail_row.type_id)
        desc = _generalize_endpoint(tx, desc, ARRIVING, head_row.type_id)
        _fit_properties(tx, desc, props)
    props[LEAVING] = _endpoint_key_value(tx, desc, LEAVING, tail_row)
    props[ARRIVING] = _endpoint_key_value(tx, desc, ARRIVING, head_row)
    uid = tx.insert_row(desc.type_id, props)
    row = tx.view().get_row(uid)
    if pattern.alias is not None:
        if pattern.alias in bindings:
            raise ExecutionError(f"{pattern.alias} is already bound")
        bindings[pattern.alias] = row
    return row


# --- CREATE TYPE / schema statements ---


def exec_create_type(tx: Transaction, stmt: CreateTypeStatement):
    columns = [_column_descriptor(tx, name, type_name) for name, type_name in stmt.columns]
    kind = stmt.kind
    if kind is None and stmt.supertype is not None:
        sup = tx.catalog.lookup_label(stmt.supertype)
        if sup is None:
            raise SchemaError(f"unknown supertype {stmt.supertype}")
        kind = sup.kind
    if kind is None and stmt.leaving is not None:
        kind = cat.KIND_EDGE
    if kind == cat.KIND_NODE:
        tx.define_node_type(stmt.label, columns, stmt.supertype)
    elif kind == cat.KIND_EDGE:
        if stmt.leaving is None or stmt.arriving is None:
            raise SchemaError("an edge type needs LEAVING and ARRIVING node types")
        tx.define_edge_type(stmt.label, columns, stmt.leaving, stmt.arriving)
    else:
        if stmt.supertype is not None:
            raise SchemaError("plain record types cannot have supertypes")
        tx.define_plain_type(stmt.label, columns)
    return None


# --- SET / DELETE / RETURN ---


def exec_set(tx: Transaction, stmt: SetStatement, bindings: dict) -> None:
    for ref, expr in stmt.assignments:
        if len(ref.path) != 2:
            raise ExecutionError("SET expects alias.property assignments")
        alias, prop = ref.path
        bound = bindings.get(alias)
        if not isinstance(bound, Row):
            raise ExecutionError(f"unknown identifier {alias}")
        v = eval_value(tx, expr, bindings)
        if isinstance(v, Row):
            raise ExecutionError(f"{prop} cannot hold a whole row")
        if v is not None:
            _fit_properties(tx, tx.catalog.get(bound.type_id), {prop: v})
        tx.update_row(bound.uid, {prop: v})
        bindings[alias] = tx.view().get_row(bound.uid)


def exec_delete(tx: Transaction, stmt: DeleteStatement, bindings: dict) -> None:
    bound = bindings.get(stmt.alias)
    if not isinstance(bound, Row):
        raise ExecutionError(f"unknown identifier {stmt.alias}")
    tx.delete_row(bound.uid, cascade=stmt.cascade)


def exec_return(tx: Transaction, stmt: ReturnStatement, bindings: dict) -> ResultTable:
    headers = [header for header, _ in stmt.items]
    row = [eval_value(tx, expr, bindings) for _, expr in stmt.items]
    return ResultTable(headers, [row])
