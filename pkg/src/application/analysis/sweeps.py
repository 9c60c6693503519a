# src/application/analysis/sweeps.py
"""Re-selection, re-inference and re-evaluation of a recorded run under other settings."""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Dict, List, Mapping, Optional, Sequence

import pandas as pd

from ...domain.entities.evaluation import DifficultyRules, EvalOutcome
from ...domain.entities.run_config import StageModelConfig
from ...domain.entities.schema import SchemaDb
from ...domain.entities.scoring import ScoredExample, WeightConfig
from ...domain.entities.test_case import TestCase
from ...infrastructure.llm.client import LLMClient
from ..evaluation.evaluator import evaluate_case
from ..evaluation.report import BUCKETS, EvalReport, aggregate
from ..inference.sql_inferencer import infer_sql
from ..scoring.relevance import reweight, select_examples

logger = logging.getLogger(__name__)

DEFAULT_WEIGHT_GRID = (
    WeightConfig(),
    WeightConfig(1.0, 0.0, 0.0),
    WeightConfig(0.0, 1.0, 0.0),
    WeightConfig(0.0, 0.0, 1.0),
    WeightConfig(0.5, 0.5, 0.0),
    WeightConfig(0.5, 0.0, 0.5),
    WeightConfig(0.0, 0.5, 0.5),
)

Selections = Mapping[int, Sequence[ScoredExample]]


@dataclass
class SweepContext:
    """What re-inference needs from a recorded run."""
    cases: Sequence[TestCase]
    schemas: Mapping[str, SchemaDb]
    scored: Mapping[int, Sequence[ScoredExample]]
    client: LLMClient
    stage: StageModelConfig
    fallback_k: int = 3
    include_reasoning: bool = True
    include_examples: bool = True
    filtering: bool = True
    timeout_ms: int = 30000
    rules: DifficultyRules = DifficultyRules()
    parallelism: int = 1

    def select(self, items: Sequence[ScoredExample], theta: float) -> List[ScoredExample]:
        if not self.filtering:
            return [replace(item, selected=True) for item in items]
        return select_examples(items, theta, self.fallback_k)

    def _outcome(self, case: TestCase, selections: Selections) -> EvalOutcome:
        if case.id not in self.scored:
            # generation failed for this case in the recorded run
            return evaluate_case(case, "", self.schemas[case.db_id], self.rules, self.timeout_ms)
        selected = [item for item in selections.get(case.id, ()) if item.selected] if self.include_examples else []
        prediction = infer_sql(
            case, self.schemas[case.db_id], selected, self.client, self.stage, self.include_reasoning
        )
        return evaluate_case(
            case, prediction.sql, self.schemas[case.db_id], self.rules, self.timeout_ms, prediction.fallback_used
        )

    def evaluate(self, selections: Selections) -> EvalReport:
        with ThreadPoolExecutor(max_workers=self.parallelism) as executor:
            outcomes = list(executor.map(lambda case: self._outcome(case, selections), self.cases))
        return aggregate(outcomes)


def _report_row(report: EvalReport) -> Dict[str, Optional[float]]:
    return {bucket: report.grid[bucket]["ex"] for bucket in BUCKETS}


def threshold_sweep(ctx: SweepContext, thresholds: Sequence[float]) -> pd.DataFrame:
    """
    EX overall and per difficulty for each threshold.

    Returns:
        DataFrame with columns theta, easy, medium, hard, extra, all
    """
    rows: List[Dict] = []
    for theta in thresholds:
        selections = {cid: ctx.select(items, theta) for cid, items in ctx.scored.items()}
        report = ctx.evaluate(selections)
        logger.info(f"theta={theta}: EX {report.overall_ex()}")
        rows.append({"theta": theta, **_report_row(report)})
    return pd.DataFrame(rows, columns=["theta"] + BUCKETS)


def weight_grid(ctx: SweepContext, theta: float, grid: Sequence[WeightConfig] = DEFAULT_WEIGHT_GRID) -> pd.DataFrame:
    """
    EX for each weight vector, recombining the stored judge components locally.

    Returns:
        DataFrame with columns alpha, beta, gamma, easy, medium, hard, extra, all
    """
    rows: List[Dict] = []
    for weights in grid:
        selections = {
            cid: ctx.select(reweight(items, weights), theta) for cid, items in ctx.scored.items()
        }
        report = ctx.evaluate(selections)
        logger.info(f"weights={weights.label}: EX {report.overall_ex()}")
        rows.append({"alpha": weights.alpha, "beta": weights.beta, "gamma": weights.gamma, **_report_row(report)})
    return pd.DataFrame(rows, columns=["alpha", "beta", "gamma"] + BUCKETS)


def ablation_table(reports: Mapping[str, EvalReport]) -> pd.DataFrame:
    """One EX row per configuration name, in insertion order."""
    rows = [{"configuration": name, **_report_row(report)} for name, report in reports.items()]
    return pd.DataFrame(rows, columns=["configuration"] + BUCKETS)
