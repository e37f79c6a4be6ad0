import pathlib

import pytest

from graphtables import Database

CORPUS = pathlib.Path(__file__).resolve().parent.parent / "corpus"

FAMILY_CREATE = (
    "CREATE (a:Person {name:'Fred Smith'})<-[:Child]-(b:Person {name:'Peter Smith'}), "
    "(a)-[:Child]->(c:Person {name:'Mary Smith'})"
    "-[:Child]->(d:Person {name:'Lee Smith'}), "
    "(c)-[:Child]->(e:Person {name:'Bill Smith'})"
)


@pytest.fixture
def db():
    return Database()


@pytest.fixture
def family(db):
    """Five Person nodes (uids 1..5) and four Child edges (uids 6..9)."""
    db.execute(FAMILY_CREATE)
    return db


def names(table):
    """A result's single column as a set of plain strings."""
    assert len(table.columns) == 1
    return {row[0] for row in table.rows}
