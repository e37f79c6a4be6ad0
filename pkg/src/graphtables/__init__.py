"""Typed graph tables: a relational store whose rows are graph nodes and
edges, driven by a SQL-flavored statement language with path patterns."""

from .engine import Database, ResultTable, Session
from .errors import (
    CommitError,
    ExecutionError,
    GraphTablesError,
    LexError,
    ParseError,
    SchemaError,
    StorageError,
)

__all__ = [
    "Database",
    "ResultTable",
    "Session",
    "GraphTablesError",
    "LexError",
    "ParseError",
    "SchemaError",
    "StorageError",
    "ExecutionError",
    "CommitError",
]

__version__ = "0.1.0"
