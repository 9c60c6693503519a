# src/application/services/evaluation_service.py
import logging
from typing import List, Optional, Tuple

from ...domain.entities.evaluation import EvalOutcome
from ...domain.entities.test_case import TestCase
from ...domain.errors import DatasetError
from ...infrastructure.persistence.run_directory import EVAL_FILE, PREDICTIONS_FILE, REPORT_FILE
from ..evaluation.evaluator import evaluate_case
from ..evaluation.report import EvalReport, aggregate
from .run_context import RunContext, map_cases

logger = logging.getLogger(__name__)

# (sql, fallback used)
PredictedCase = Tuple[str, bool]


def read_pred_file(path: str, n_cases: int) -> List[PredictedCase]:
    """
    Read a Spider-style pred.sql: one query per line, optionally followed by a tab and the db_id.

    Raises:
        DatasetError: If the file cannot be read or its line count differs from the case count
    """
    try:
        with open(path, encoding="utf-8") as handle:
            lines = handle.read().splitlines()
    except OSError as e:
        raise DatasetError(f"Could not read {path}: {e}") from e
    if len(lines) != n_cases:
        raise DatasetError(f"{path} has {len(lines)} lines for {n_cases} test cases")
    return [(line.split("\t")[0].strip(), False) for line in lines]


class EvaluationService:
    """Grades a run's predictions, or an external pred.sql, against the gold queries."""

    def __init__(self, context: RunContext, progress: bool = True):
        self.context = context
        self.progress = progress

    def _own_predictions(self) -> List[PredictedCase]:
        records = {r["test_case_id"]: r for r in self.context.run_dir.read_jsonl(PREDICTIONS_FILE)}
        return [
            (records[case.id]["sql"], records[case.id].get("fallback_used", False)) if case.id in records else ("", False)
            for case in self.context.cases
        ]

    def evaluate(self, pred_file: Optional[str] = None, force: bool = False) -> EvalReport:
        """
        Compute EX, EM and difficulty per case and write 05_eval.json and report.txt.

        Args:
            pred_file: External predictions to grade instead of the run's own
            force: Recompute even when 05_eval.json exists

        Returns:
            The aggregated report

        Raises:
            StageOrderError: If the run has no predictions and no pred_file is given
        """
        run_dir = self.context.run_dir
        if pred_file is None and run_dir.exists(EVAL_FILE) and not force:
            logger.info(f"{EVAL_FILE} already exists, skipping stage")
            return EvalReport.from_dict(run_dir.read_json(EVAL_FILE)["summary"])

        cases = self.context.cases
        predicted = read_pred_file(pred_file, len(cases)) if pred_file else self._own_predictions()
        config = self.context.config

        def task(item: Tuple[TestCase, PredictedCase]) -> EvalOutcome:
            case, (sql, fallback_used) = item
            return evaluate_case(
                case,
                sql,
                self.context.schemas[case.db_id],
                config.difficulty_rules,
                config.timeout_ms,
                fallback_used,
            )

        outcomes = map_cases(task, list(zip(cases, predicted)), config.parallelism, "evaluate", self.progress)
        report = aggregate(outcomes)
        run_dir.write_json(EVAL_FILE, {"outcomes": [o.to_dict() for o in outcomes], "summary": report.to_dict()})
        run_dir.write_text(REPORT_FILE, report.to_text())
        logger.info(f"Overall EX: {report.overall_ex()}")
        return report

    def outcomes(self) -> List[EvalOutcome]:
        return [EvalOutcome.from_dict(o) for o in self.context.run_dir.read_json(EVAL_FILE)["outcomes"]]
