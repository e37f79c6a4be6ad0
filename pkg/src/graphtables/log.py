"""Append-only commit log: length-prefixed binary records, one per commit.

Record framing: 4-byte big-endian payload length, 4-byte CRC32 of the payload,
then the JSON payload itself.  A record is self-contained: it carries the
full serialized descriptors changed by the transaction plus the physical row
deltas, so replay applies records without re-running validation.  A torn
trailing record (incomplete frame or checksum mismatch) is skipped with a
warning and reading stops there.
"""

from __future__ import annotations

import json
import logging
import struct
import zlib

from .values import from_jsonable, to_jsonable

log = logging.getLogger("graphtables")

_HEADER = struct.Struct(">II")


def encode_record(seq: int, schema: list[dict], row_ops: list, next_uid: int) -> bytes:
    """row_ops: [["put", uid, type_id, {col: value}] | ["del", uid]]"""
    ops = []
    for op in row_ops:
        if op[0] == "put":
            _tag, uid, tid, vals = op
            ops.append(["put", uid, tid, {k: to_jsonable(v) for k, v in vals.items()}])
        else:
            ops.append(["del", op[1]])
    payload = json.dumps(
        {"seq": seq, "schema": schema, "rows": ops, "next_uid": next_uid},
        ensure_ascii=False, separators=(",", ":"),
    ).encode("utf-8")
    return _HEADER.pack(len(payload), zlib.crc32(payload)) + payload


def decode_rows(payload: dict) -> list:
    ops = []
    for op in payload["rows"]:
        if op[0] == "put":
            _tag, uid, tid, vals = op
            ops.append(["put", uid, tid, {k: from_jsonable(v) for k, v in vals.items()}])
        else:
            ops.append(["del", op[1]])
    return ops


def read_records(fh):
    """Yield decoded payload dicts until EOF or the first damaged record."""
    while True:
        head = fh.read(_HEADER.size)
        if not head:
            return
        if len(head) < _HEADER.size:
            log.warning("commit log ends with a torn record header; ignoring it")
            return
        length, crc = _HEADER.unpack(head)
        payload = fh.read(length)
        if len(payload) < length:
            log.warning("commit log ends with a torn record; ignoring it")
            return
        if zlib.crc32(payload) != crc:
            log.warning("commit log record fails its checksum; ignoring the rest of the log")
            return
        yield json.loads(payload.decode("utf-8"))
