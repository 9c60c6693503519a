# src/application/evaluation/difficulty.py
from ...domain.entities.evaluation import Difficulty, DifficultyRules
from ...domain.errors import ClassificationError, SqlParseError
from .sql_sketch import SqlSketch, sketch_query


def component_count(sketch: SqlSketch) -> int:
    """joins + aggregates + nested selects + set operations, plus one each for GROUP BY, ORDER BY and a compound WHERE."""
    return (
        sketch.join_count
        + sketch.aggregate_count
        + sketch.nested_count
        + sketch.set_op_count
        + (1 if sketch.group_by else 0)
        + (1 if sketch.order_by else 0)
        + (1 if len(sketch.where) > 1 else 0)
    )


def classify_difficulty(gold: str, rules: DifficultyRules = DifficultyRules()) -> Difficulty:
    try:
        sketch = sketch_query(gold)
    except SqlParseError as e:
        raise ClassificationError(f"Cannot classify unparseable query: {e}") from e
    return rules.bucket(component_count(sketch))
