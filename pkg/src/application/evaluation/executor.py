# src/application/evaluation/executor.py
import logging
import os
import sqlite3
import time
from urllib.parse import quote

import sqlglot
from sqlglot import exp
from sqlglot.errors import SqlglotError

from ...domain.entities.evaluation import ResultTable
from ...domain.entities.schema import SchemaDb
from ...domain.errors import DatabaseMissingError, ExecutionError, QueryTimeoutError, WriteRejectedError
from .sql_sketch import DIALECT

logger = logging.getLogger(__name__)

WRITE_KEYWORDS = {
    "alter", "attach", "create", "delete", "detach", "drop", "insert",
    "pragma", "reindex", "replace", "update", "vacuum",
}
WRITE_NODES = tuple(
    getattr(exp, name)
    for name in ("Insert", "Update", "Delete", "Drop", "Create", "Alter", "AlterTable", "Merge", "Pragma")
    if hasattr(exp, name)
)
# progress handler granularity, in SQLite virtual machine instructions
PROGRESS_STEPS = 1000


def reject_writes(sql: str) -> None:
    """Raise WriteRejectedError for anything that could modify the database."""
    words = sql.strip().split(None, 1)
    if words and words[0].lower() in WRITE_KEYWORDS:
        raise WriteRejectedError(f"Write statement rejected: {words[0].upper()}")
    try:
        statements = sqlglot.parse(sql, read=DIALECT)
    except SqlglotError:
        return  # SQLite reports the syntax error itself
    for statement in statements:
        if statement is None:
            continue
        if isinstance(statement, WRITE_NODES) or any(True for _ in statement.find_all(*WRITE_NODES)):
            raise WriteRejectedError(f"Write statement rejected: {statement.key.upper()}")


def _connect(path: str) -> sqlite3.Connection:
    uri = f"file:{quote(os.path.abspath(path))}?mode=ro"
    connection = sqlite3.connect(uri, uri=True, check_same_thread=False)
    connection.text_factory = lambda raw: raw.decode("utf-8", errors="replace")
    return connection


def execute(sql: str, db: SchemaDb, timeout_ms: int = 30000) -> ResultTable:
    """
    Run one query against the database of `db`, read-only.

    Args:
        sql: Query text
        db: Schema whose sqlite_path is queried
        timeout_ms: Wall-clock budget for the query

    Returns:
        ResultTable with the rows in execution order

    Raises:
        DatabaseMissingError: If the schema has no database file
        WriteRejectedError: If the statement would modify data
        QueryTimeoutError: If the query exceeds timeout_ms
        ExecutionError: For any other SQLite error
    """
    if not db.sqlite_path or not os.path.exists(db.sqlite_path):
        raise DatabaseMissingError(f"No database file for {db.db_id}")
    reject_writes(sql)

    connection = _connect(db.sqlite_path)
    deadline = time.monotonic() + timeout_ms / 1000.0
    connection.set_progress_handler(lambda: 1 if time.monotonic() > deadline else 0, PROGRESS_STEPS)
    try:
        cursor = connection.execute(sql)
        rows = cursor.fetchall()
        columns = len(cursor.description or ())
    except sqlite3.OperationalError as e:
        if "interrupted" in str(e).lower():
            raise QueryTimeoutError(f"Query exceeded {timeout_ms} ms on {db.db_id}") from e
        raise ExecutionError(str(e)) from e
    except (sqlite3.Error, sqlite3.Warning) as e:
        raise ExecutionError(str(e)) from e
    finally:
        connection.close()
    return ResultTable(columns=columns, ordered_rows=tuple(tuple(row) for row in rows))
