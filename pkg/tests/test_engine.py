"""Database lifecycle: session transaction statements, commit-log replay,
torn-tail tolerance, and state digests."""

import struct

import pytest

from graphtables.engine import Database, render_row
from graphtables.errors import StorageError

from conftest import FAMILY_CREATE, names

DESCENDANTS = "MATCH ({Name:'Peter Smith'}) [()-[:Child]->()]+ (x) RETURN x.Name"


# --- transaction statements through a session ---

def test_begin_twice_is_refused(db):
    sess = db.session()
    sess.execute("BEGIN")
    with pytest.raises(StorageError, match="already open"):
        sess.execute("BEGIN")


def test_commit_needs_an_open_transaction(db):
    with pytest.raises(StorageError, match="no open transaction"):
        db.session().execute("COMMIT")


def test_rollback_needs_an_open_transaction(db):
    with pytest.raises(StorageError, match="no open transaction"):
        db.session().execute("ROLLBACK")


def test_open_transaction_is_private_until_commit(db):
    writer = db.session()
    writer.execute("BEGIN")
    writer.execute("CREATE (:Person {Name: 'Ada'})")
    # a concurrent reader on its own snapshot sees nothing yet
    assert db.execute("MATCH (x:Person) RETURN x.Name").rows == []
    writer.execute("COMMIT")
    assert names(db.execute("MATCH (x:Person) RETURN x.Name")) == {"Ada"}


def test_rollback_discards_staged_work(db):
    sess = db.session()
    sess.execute("BEGIN")
    sess.execute("CREATE (:Person {Name: 'Ada'})")
    sess.execute("ROLLBACK")
    assert db.execute("MATCH (x:Person) RETURN x.Name").rows == []
    # the session is usable again afterwards
    sess.execute("CREATE (:Person {Name: 'Bea'})")
    assert names(db.execute("MATCH (x:Person) RETURN x.Name")) == {"Bea"}


def test_statement_outside_begin_commits_immediately(db):
    db.execute("CREATE (:Person {Name: 'Ada'})")
    assert names(db.execute("MATCH (x:Person) RETURN x.Name")) == {"Ada"}


def test_multi_statement_transaction_commits_as_one(db):
    sess = db.session()
    sess.execute("BEGIN")
    sess.execute("CREATE (a:Person {Name: 'Ada'})")
    # aliases are statement-scoped, so the hookup rereads Ada from staging
    sess.execute("MATCH (a:Person {Name: 'Ada'}) "
                 "THEN CREATE (b:Person {Name: 'Bea'}), (b)-[:Knows]->(a) END")
    sess.execute("COMMIT")
    table = db.execute("MATCH (x:Person)-[:Knows]->(y:Person) RETURN y.Name")
    assert names(table) == {"Ada"}


# --- file-backed databases ---

def test_reopen_replays_rows_and_schema(tmp_path):
    path = tmp_path / "family.db"
    db = Database(path)
    db.execute(FAMILY_CREATE)
    before = db.state_hash()
    db.close()

    db2 = Database(path)
    assert db2.name == "family"
    assert db2.state_hash() == before
    assert names(db2.execute(DESCENDANTS)) == {
        "Fred Smith", "Mary Smith", "Lee Smith", "Bill Smith"}
    db2.close()


def test_reopen_rebuilds_component_registry(tmp_path):
    db = Database(tmp_path / "family.db")
    db.execute(FAMILY_CREATE)
    db.close()

    db2 = Database(tmp_path / "family.db")
    table = db2.execute("SHOW GRAPHS")
    assert table.columns == ["GRAPH", "NODES", "EDGES"]
    assert [list(r) for r in table.rows] == [[1, 5, 4]]
    db2.close()


def test_reopen_continues_the_uid_sequence(tmp_path):
    path = tmp_path / "people.db"
    db = Database(path)
    db.execute("CREATE (:Person {Name: 'Ada'}), (:Person {Name: 'Bea'})")
    db.close()

    db2 = Database(path)
    assert db2.peek_uid() == 3
    db2.execute("CREATE (:Person {Name: 'Cal'})")
    table = db2.execute("MATCH (x:Person) WHERE x.Name = 'Cal' RETURN x.Id")
    assert [r[0] for r in table.rows] == [3]
    db2.close()


def test_reopen_after_key_change_relinks_edges(tmp_path):
    path = tmp_path / "rekey.db"
    db = Database(path)
    db.execute(FAMILY_CREATE)
    db.execute("ALTER TABLE Person ADD PRIMARY KEY (Name)")
    before = db.state_hash()
    db.close()

    # replay has to restore the rewritten reference columns and still
    # reconnect edge adjacency through the new string-valued key
    db2 = Database(path)
    assert db2.state_hash() == before
    assert names(db2.execute(DESCENDANTS)) == {
        "Fred Smith", "Mary Smith", "Lee Smith", "Bill Smith"}
    db2.close()


def test_file_and_memory_builds_hash_alike(tmp_path):
    statements = [
        FAMILY_CREATE,
        "MATCH (x:Person) WHERE x.Name = 'Lee Smith' SET x.Name = 'Lee Jones'",
    ]
    mem = Database()
    disk = Database(tmp_path / "twin.db")
    for text in statements:
        mem.execute(text)
        disk.execute(text)
    assert mem.state_hash() == disk.state_hash()
    disk.close()


def test_state_hash_reflects_uid_history(db):
    other = Database()
    db.execute("CREATE (:Person {Name: 'Ada'})")
    db.execute("MATCH (x:Person) DELETE x")
    other.execute("CREATE (:Person {Name: 'Ada'})")
    other.execute("MATCH (x:Person) DELETE x")
    assert db.state_hash() == other.state_hash()

    # same visible content, different allocation history
    fresh = Database()
    fresh.execute("CREATE (:Person {Name: 'Zoe'})")
    fresh.execute("MATCH (x:Person) DELETE x")
    fresh.execute("CREATE (:Person {Name: 'Ada'})")
    fresh.execute("MATCH (x:Person) DELETE x")
    assert fresh.state_hash() != db.state_hash()


def test_fsync_mode_still_writes_readable_records(tmp_path):
    path = tmp_path / "careful.db"
    db = Database(path, fsync=True)
    db.execute("CREATE (:Person {Name: 'Ada'})")
    db.close()
    db2 = Database(path)
    assert names(db2.execute("MATCH (x:Person) RETURN x.Name")) == {"Ada"}
    db2.close()


# --- damaged log tails ---

def record_ends(path):
    """Byte offsets just past each complete record frame in a log file."""
    data = path.read_bytes()
    ends, pos = [], 0
    while pos + 8 <= len(data):
        length, _crc = struct.unpack(">II", data[pos:pos + 8])
        nxt = pos + 8 + length
        if nxt > len(data):
            break
        ends.append(nxt)
        pos = nxt
    return ends


def two_commit_log(tmp_path):
    path = tmp_path / "cut.db"
    db = Database(path)
    db.execute("CREATE (:Person {Name: 'Ada'})")
    prefix = db.state_hash()
    db.execute("CREATE (:Person {Name: 'Bea'})")
    db.close()
    ends = record_ends(path)
    assert len(ends) == 2
    return path, prefix, ends


@pytest.mark.parametrize("extra", [0, 5, 13], ids=["clean", "torn-header", "torn-payload"])
def test_truncated_tail_is_dropped(tmp_path, extra):
    path, prefix, ends = two_commit_log(tmp_path)
    with open(path, "r+b") as fh:
        fh.truncate(ends[0] + extra)

    db = Database(path)
    assert names(db.execute("MATCH (x:Person) RETURN x.Name")) == {"Ada"}
    assert db.state_hash() == prefix
    db.close()


def test_corrupt_tail_checksum_is_dropped(tmp_path):
    path, prefix, ends = two_commit_log(tmp_path)
    data = bytearray(path.read_bytes())
    data[ends[0] + 10] ^= 0xFF      # inside the second record's payload
    path.write_bytes(bytes(data))

    db = Database(path)
    assert db.state_hash() == prefix
    db.close()


def test_commits_after_a_trimmed_tail_extend_the_log(tmp_path):
    path, _prefix, ends = two_commit_log(tmp_path)
    with open(path, "r+b") as fh:
        fh.truncate(ends[0] + 3)

    # opening discards the torn fragment, so this commit lands on a clean tail
    db = Database(path)
    db.execute("CREATE (:Person {Name: 'Cal'})")
    db.close()

    db2 = Database(path)
    assert names(db2.execute("MATCH (x:Person) RETURN x.Name")) == {"Ada", "Cal"}
    db2.close()


# --- rendering ---

def test_render_row_shows_label_and_values(family):
    view = family.read_view()
    desc = family.catalog.lookup_label("PERSON")
    row = next(r for r in view.scan_type(desc.type_id) if r.uid == 2)
    assert render_row(family.catalog, row) == "PERSON(ID=2,NAME=Peter Smith)"
