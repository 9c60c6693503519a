# src/application/analysis/similarity.py
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from ...domain.errors import UndefinedCorrelationError

N_BINS = 10


@dataclass(frozen=True)
class SimilarityBin:
    index: int
    lower: float
    upper: float
    population: int
    mean_ex: Optional[float]


@dataclass(frozen=True)
class SimilarityBins:
    bins: Tuple[SimilarityBin, ...]

    @property
    def total(self) -> int:
        return sum(b.population for b in self.bins)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [(b.index, b.lower, b.upper, b.population, b.mean_ex) for b in self.bins],
            columns=["bin", "lower", "upper", "population", "mean_ex"],
        )


def minmax_normalize(values: Sequence[float]) -> np.ndarray:
    """Scale to [0, 1]; a constant input maps to all zeros."""
    array = np.asarray(values, dtype=float)
    if array.size == 0:
        return array
    low, high = array.min(), array.max()
    if high == low:
        return np.zeros_like(array)
    return (array - low) / (high - low)


def similarity_ex_bins(pairs: Sequence[Tuple[float, bool]], n_bins: int = N_BINS) -> SimilarityBins:
    """
    Mean EX per equal-width similarity bin over [0, 1].

    The value 1.0 falls in the last bin. Empty bins report mean_ex None.

    Raises:
        ValueError: If a similarity lies outside [0, 1]
    """
    sums = [0.0] * n_bins
    counts = [0] * n_bins
    for similarity, ex in pairs:
        if not 0.0 <= similarity <= 1.0:
            raise ValueError(f"Similarity must be within [0, 1], got {similarity}")
        index = min(int(math.floor(similarity * n_bins)), n_bins - 1)
        sums[index] += float(ex)
        counts[index] += 1

    bins = tuple(
        SimilarityBin(
            index=i,
            lower=i / n_bins,
            upper=(i + 1) / n_bins,
            population=counts[i],
            mean_ex=sums[i] / counts[i] if counts[i] else None,
        )
        for i in range(n_bins)
    )
    return SimilarityBins(bins=bins)


def correlation(xs: Sequence[float], ys: Sequence[float]) -> float:
    """
    Pearson correlation of two equally long series.

    Raises:
        ValueError: If the lengths differ or fewer than two points are given
        UndefinedCorrelationError: If either series is constant
    """
    if len(xs) != len(ys):
        raise ValueError(f"Series lengths differ: {len(xs)} != {len(ys)}")
    if len(xs) < 2:
        raise ValueError("Correlation needs at least two points")
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        raise UndefinedCorrelationError("Correlation is undefined for a constant series")
    return float(np.clip(np.corrcoef(x, y)[0, 1], -1.0, 1.0))
