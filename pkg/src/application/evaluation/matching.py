# src/application/evaluation/matching.py
"""Execution accuracy and exact-match comparisons of a predicted query against gold."""
import re
from typing import Any, Optional, Sequence, Tuple

from ...domain.entities.schema import SchemaDb
from ...domain.errors import DatabaseMissingError, ExecutionError, GoldInvalidError, SqlParseError
from .executor import execute
from .sql_sketch import sketch_query

TOLERANCE_DIGITS = 6
FLOAT_TOLERANCE = 10 ** -TOLERANCE_DIGITS
ORDER_BY = re.compile(r"\border\s+by\b", re.IGNORECASE)


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float))


def _cell_key(value: Any) -> Tuple[int, Any]:
    if value is None:
        return 0, 0
    if _is_number(value):
        # rounded to the tolerance grid so near-equal values sort by the remaining cells
        return 1, round(float(value), TOLERANCE_DIGITS)
    if isinstance(value, str):
        return 2, value
    return 3, bytes(value)


def _row_key(row: Sequence[Any]) -> Tuple:
    return tuple(_cell_key(value) for value in row)


def values_equal(left: Any, right: Any) -> bool:
    if _is_number(left) and _is_number(right):
        return abs(float(left) - float(right)) <= FLOAT_TOLERANCE
    return left == right


def rows_equal(left: Sequence[Sequence[Any]], right: Sequence[Sequence[Any]], ordered: bool) -> bool:
    if len(left) != len(right):
        return False
    if not ordered:
        left, right = sorted(left, key=_row_key), sorted(right, key=_row_key)
    return all(
        len(a) == len(b) and all(values_equal(x, y) for x, y in zip(a, b))
        for a, b in zip(left, right)
    )


def gold_is_ordered(gold: str) -> bool:
    try:
        return sketch_query(gold).has_order_by
    except SqlParseError:
        return bool(ORDER_BY.search(gold))


def compare_execution(pred: str, gold: str, db: SchemaDb, timeout_ms: int = 30000) -> Tuple[bool, Optional[str]]:
    """Execution match plus the reason a prediction failed to execute, if it did."""
    if not db.has_database:
        raise DatabaseMissingError(f"No database file for {db.db_id}")
    try:
        gold_table = execute(gold, db, timeout_ms)
    except ExecutionError as e:
        raise GoldInvalidError(f"Gold query of {db.db_id} does not execute: {e}") from e
    try:
        pred_table = execute(pred, db, timeout_ms)
    except ExecutionError as e:
        return False, f"{type(e).__name__}: {e}"

    if pred_table.columns != gold_table.columns:
        return False, None
    return rows_equal(pred_table.ordered_rows, gold_table.ordered_rows, gold_is_ordered(gold)), None


def execution_match(pred: str, gold: str, db: SchemaDb, timeout_ms: int = 30000) -> bool:
    """
    True when both queries return the same result on the database.

    Results are compared as sequences when the gold query has a top-level
    ORDER BY and as multisets otherwise; numbers match within 1e-6.

    Raises:
        GoldInvalidError: If the gold query does not execute
    """
    return compare_execution(pred, gold, db, timeout_ms)[0]


def exact_match(pred: str, gold: str) -> bool:
    """
    Compare canonical sketches of both queries.

    Raises:
        GoldInvalidError: If the gold query does not parse
    """
    try:
        gold_sketch = sketch_query(gold)
    except SqlParseError as e:
        raise GoldInvalidError(f"Gold query does not parse: {e}") from e
    try:
        pred_sketch = sketch_query(pred)
    except SqlParseError:
        return False
    return pred_sketch == gold_sketch
