"""Database facade: ties the catalog, row store, commit log, component
registry and statement execution together behind one object."""

from __future__ import annotations

import hashlib
import json
import pathlib
import threading

from . import catalog as cat
from . import log as logmod
from . import values as val
from .catalog import Catalog
from .errors import StorageError
from .graphset import GraphSet
from .parser import parse_expression, parse_statement
from .storage import ReadView, Row, Store, Transaction
from .syntax import (BeginStatement, CommitStatement, RollbackStatement)


class ResultTable:
    """Columnar statement result; empty `columns` means a yes/no existence
    check whose row count is the answer."""

    def __init__(self, columns: list[str], rows: list[list]):
        self.columns = columns
        self.rows = rows

    def __len__(self):
        return len(self.rows)

    def __repr__(self):
        return f"ResultTable({self.columns}, {len(self.rows)} rows)"


class Database:
    def __init__(self, path=None, fsync: bool = False):
        self.path = pathlib.Path(path) if path is not None else None
        self.name = self.path.stem if self.path is not None else "memory"
        self.fsync = fsync
        self.catalog = Catalog()
        self.store = Store()
        self.graphs = GraphSet()
        self.commit_lock = threading.RLock()
        self._next_uid = 1
        self._log_fh = None
        if self.path is not None:
            if self.path.exists():
                valid = 0
                with open(self.path, "rb") as fh:
                    for payload in logmod.read_records(fh):
                        self._apply_record(payload)
                        valid = fh.tell()
                    end = fh.seek(0, 2)
                if valid < end:
                    # trim the torn tail so our own appends stay readable
                    with open(self.path, "r+b") as fh:
                        fh.truncate(valid)
                self._rebuild_graphs()
            self._log_fh = open(self.path, "ab")

    # --- identity and plumbing used by transactions ---

    def allocate_uid(self) -> int:
        uid = self._next_uid
        self._next_uid += 1
        return uid

    def peek_uid(self) -> int:
        return self._next_uid

    def append_log_record(self, data: bytes) -> None:
        if self._log_fh is None:
            return
        self._log_fh.write(data)
        self._log_fh.flush()
        if self.fsync:
            import os
            os.fsync(self._log_fh.fileno())

    def close(self) -> None:
        if self._log_fh is not None:
            self._log_fh.close()
            self._log_fh = None

    # --- opening an existing log ---

    def _apply_record(self, payload: dict) -> None:
        for data in payload["schema"]:
            self.catalog.apply_descriptor_dict(data, parse_expression)
        final: dict[int, Row | None] = {}
        for op in logmod.decode_rows(payload):
            if op[0] == "put":
                _tag, uid, tid, vals = op
                final[uid] = Row(uid, tid, vals)
            else:
                final[op[1]] = None
        seq = payload["seq"]
        edge_tids = {d.type_id for d in self.catalog.types(cat.KIND_EDGE)}
        self.store.apply(seq, final, {}, edge_tids)
        # reconnect adjacency caches now that the record's rows are in place
        view = ReadView(self.store, seq, self.catalog)
        for uid, row in final.items():
            if row is None or row.type_id not in edge_tids:
                continue
            desc = self.catalog.get(row.type_id)
            leaving = view.deref_node(desc.leaving_type, row.values.get(cat.LEAVING))
            arriving = view.deref_node(desc.arriving_type, row.values.get(cat.ARRIVING))
            if leaving is not None and arriving is not None:
                self.store.relink_edge(uid, (leaving.uid, arriving.uid))
        self._next_uid = max(self._next_uid, payload["next_uid"])

    def _rebuild_graphs(self) -> None:
        self.graphs.clear()
        seq = self.store.commit_seq
        for desc in self.catalog.types(cat.KIND_NODE):
            for row in self.store.scan_committed(desc.type_id, seq):
                self.graphs.add_node(row.uid)
        for desc in self.catalog.types(cat.KIND_EDGE):
            for row in self.store.scan_committed(desc.type_id, seq):
                ends = self.store.edge_endpoints.get(row.uid)
                if ends is not None:
                    self.graphs.add_edge(row.uid, ends[0], ends[1])

    # --- transactions and statements ---

    def begin(self) -> Transaction:
        return Transaction(self, self.store.commit_seq)

    def session(self) -> "Session":
        return Session(self)

    def execute(self, text: str):
        """One statement in its own auto-committed transaction."""
        return self.session().execute(text)

    def read_view(self) -> ReadView:
        return ReadView(self.store, self.store.commit_seq, self.catalog)

    # --- state digest (durability checks) ---

    def state_hash(self) -> str:
        seq = self.store.commit_seq
        descriptors = [self.catalog.descriptor_to_dict(self.catalog.get(tid))
                       for tid in sorted(d.type_id for d in self.catalog.types())]
        rows = []
        for desc in self.catalog.types():
            for row in self.store.scan_committed(desc.type_id, seq):
                rows.append([row.uid, row.type_id,
                             {k: val.to_jsonable(v) for k, v in sorted(row.values.items())}])
        rows.sort(key=lambda r: r[0])
        digest = {"seq": seq, "next_uid": self._next_uid,
                  "catalog": descriptors, "rows": rows}
        blob = json.dumps(digest, sort_keys=True, separators=(",", ":")).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()


class Session:
    """Statement execution context: holds the open transaction, if any."""

    def __init__(self, db: Database):
        self.db = db
        self.tx: Transaction | None = None

    def execute(self, text: str):
        return self.execute_statement(parse_statement(text))

    def execute_statement(self, stmt):
        from . import executor

        if isinstance(stmt, BeginStatement):
            if self.tx is not None:
                raise StorageError("a transaction is already open")
            self.tx = self.db.begin()
            return None
        if isinstance(stmt, CommitStatement):
            if self.tx is None:
                raise StorageError("no open transaction")
            tx, self.tx = self.tx, None
            tx.commit()
            return None
        if isinstance(stmt, RollbackStatement):
            if self.tx is None:
                raise StorageError("no open transaction")
            tx, self.tx = self.tx, None
            tx.rollback()
            return None

        if self.tx is not None:
            return executor.run_statement(self.tx, stmt)
        tx = self.db.begin()
        result = executor.run_statement(tx, stmt)
        tx.commit()
        return result


def render_row(catalog: Catalog, row: Row) -> str:
    """`PERSON(ID=2,NAME=Peter Smith)`: label plus present values in
    declaration order."""
    desc = catalog.get(row.type_id)
    parts = []
    for col in catalog.effective_columns(row.type_id):
        if col.name in row.values:
            parts.append(f"{col.name}={val.render(row.values[col.name])}")
    return f"{desc.label}({','.join(parts)})"
