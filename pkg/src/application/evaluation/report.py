# src/application/evaluation/report.py
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence

import pandas as pd

from ...domain.entities.evaluation import Difficulty, EvalOutcome

BUCKETS = [d.value for d in Difficulty] + ["all"]


@dataclass(frozen=True)
class EvalReport:
    """Per-difficulty counts and EX/EM percentages; None marks an empty bucket."""
    grid: Dict[str, Dict[str, Optional[float]]]
    n_cases: int
    n_gold_invalid: int
    fallback_rate: Optional[float]

    def overall_ex(self) -> Optional[float]:
        return self.grid["all"]["ex"]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {bucket: [self.grid[bucket]["count"], self.grid[bucket]["ex"], self.grid[bucket]["em"]] for bucket in BUCKETS},
            index=["count", "EX", "EM"],
        )

    def to_text(self) -> str:
        def fmt(value: Optional[float]) -> str:
            return "-" if value is None else f"{value:.1f}"

        frame = pd.DataFrame(
            {
                bucket: [str(self.grid[bucket]["count"]), fmt(self.grid[bucket]["ex"]), fmt(self.grid[bucket]["em"])]
                for bucket in BUCKETS
            },
            index=["count", "EX", "EM"],
        )
        lines = [
            frame.to_string(),
            "",
            f"fallback rate: {fmt(self.fallback_rate)}%",
            f"gold invalid: {self.n_gold_invalid}",
        ]
        return "\n".join(lines) + "\n"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "grid": self.grid,
            "n_cases": self.n_cases,
            "n_gold_invalid": self.n_gold_invalid,
            "fallback_rate": self.fallback_rate,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "EvalReport":
        return cls(
            grid=data["grid"],
            n_cases=data["n_cases"],
            n_gold_invalid=data["n_gold_invalid"],
            fallback_rate=data["fallback_rate"],
        )


def _percent(series: pd.Series) -> Optional[float]:
    return float(series.mean() * 100.0) if len(series) else None


def aggregate(outcomes: Sequence[EvalOutcome]) -> EvalReport:
    """
    Tabulate EX and EM per difficulty and overall.

    Gold-invalid outcomes are left out of every denominator and counted
    separately.
    """
    valid: List[EvalOutcome] = [o for o in outcomes if not o.gold_invalid]
    frame = pd.DataFrame(
        [
            {"difficulty": o.difficulty.value, "ex": float(o.ex), "em": float(o.em), "fallback": float(o.fallback_used)}
            for o in valid
        ],
        columns=["difficulty", "ex", "em", "fallback"],
    )

    grid = {}
    for bucket in BUCKETS:
        part = frame if bucket == "all" else frame[frame["difficulty"] == bucket]
        grid[bucket] = {"count": int(len(part)), "ex": _percent(part["ex"]), "em": _percent(part["em"])}

    return EvalReport(
        grid=grid,
        n_cases=len(outcomes),
        n_gold_invalid=len(outcomes) - len(valid),
        fallback_rate=_percent(frame["fallback"]),
    )
