# src/application/analysis/census.py
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from ...domain.entities.scoring import ScoredExample

DEFAULT_THRESHOLDS = (0, 2, 4, 6, 8, 10)

CosineAccessor = Callable[[ScoredExample], float]


@dataclass(frozen=True)
class CensusRow:
    threshold: float
    retained: int
    filtered_pct: float
    mean_cosine: Optional[float]


@dataclass(frozen=True)
class ScoreCensus:
    total: int
    rows: Tuple[CensusRow, ...]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [(r.threshold, r.mean_cosine, r.retained, r.filtered_pct) for r in self.rows],
            columns=["threshold", "mean_cosine", "retained", "filtered_pct"],
        )


def score_census(
    scored: Sequence[ScoredExample],
    cosine_of: CosineAccessor,
    thresholds: Sequence[float] = DEFAULT_THRESHOLDS,
) -> ScoreCensus:
    """
    Count the examples a threshold keeps and how similar they are to their test question.

    Args:
        scored: Every scored example of a run
        cosine_of: Cosine between an example's question and its test question
        thresholds: Thresholds to report, one row each

    Returns:
        ScoreCensus with retained count, filtered percentage and mean cosine per threshold
    """
    rel = np.array([item.rel for item in scored], dtype=float)
    cosines = np.array([cosine_of(item) for item in scored], dtype=float)
    total = len(scored)

    rows: List[CensusRow] = []
    for threshold in thresholds:
        kept = rel >= threshold
        retained = int(kept.sum())
        filtered = (total - retained) / total * 100.0 if total else 0.0
        mean_cosine = float(cosines[kept].mean()) if retained else None
        rows.append(CensusRow(threshold=threshold, retained=retained, filtered_pct=filtered, mean_cosine=mean_cosine))
    return ScoreCensus(total=total, rows=tuple(rows))
