# src/application/evaluation/evaluator.py
import logging

from ...domain.entities.evaluation import Difficulty, DifficultyRules, EvalOutcome
from ...domain.entities.schema import SchemaDb
from ...domain.entities.test_case import TestCase
from ...domain.errors import ClassificationError, ExecutionError, GoldInvalidError
from .difficulty import classify_difficulty
from .matching import compare_execution, exact_match

logger = logging.getLogger(__name__)


def evaluate_case(
    case: TestCase,
    pred_sql: str,
    db: SchemaDb,
    rules: DifficultyRules = DifficultyRules(),
    timeout_ms: int = 30000,
    fallback_used: bool = False,
) -> EvalOutcome:
    """
    Grade one prediction for EX and EM.

    An empty prediction counts as a miss. Gold queries that do not parse or
    execute mark the outcome gold_invalid instead of failing the run.
    """
    try:
        difficulty = classify_difficulty(case.gold_sql, rules)
    except ClassificationError as e:
        logger.warning(f"Case {case.id}: {e}")
        return EvalOutcome(case.id, ex=False, em=False, difficulty=Difficulty.EXTRA,
                           diagnostics=str(e), gold_invalid=True, fallback_used=fallback_used)

    if not pred_sql.strip():
        return EvalOutcome(case.id, ex=False, em=False, difficulty=difficulty,
                           diagnostics="no prediction", fallback_used=fallback_used)

    try:
        ex, diagnostics = compare_execution(pred_sql, case.gold_sql, db, timeout_ms)
        em = exact_match(pred_sql, case.gold_sql)
    except GoldInvalidError as e:
        logger.warning(f"Case {case.id}: {e}")
        return EvalOutcome(case.id, ex=False, em=False, difficulty=difficulty,
                           diagnostics=str(e), gold_invalid=True, fallback_used=fallback_used)
    except ExecutionError as e:
        # database missing: EX is undefined, EM still meaningful
        logger.warning(f"Case {case.id}: {e}")
        return EvalOutcome(case.id, ex=False, em=exact_match(pred_sql, case.gold_sql), difficulty=difficulty,
                           diagnostics=f"{type(e).__name__}: {e}", fallback_used=fallback_used)

    return EvalOutcome(case.id, ex=ex, em=em, difficulty=difficulty,
                       diagnostics=diagnostics, fallback_used=fallback_used)
