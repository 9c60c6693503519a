# src/application/scoring/relevance.py
"""Local combination of judged components and threshold selection."""
import logging
import math
from dataclasses import replace
from typing import List, Sequence

from ...domain.entities.scoring import SCORE_MAX, SCORE_MIN, RelevanceScore, ScoredExample, WeightConfig
from ...domain.errors import ConfigurationError

logger = logging.getLogger(__name__)

# rel is snapped to this many decimals so (7+9+8)/3 lands exactly on 8
REL_DECIMALS = 9


def combine(s: float, a: float, r: float, w: WeightConfig) -> float:
    """
    Weighted relevance alpha*s + beta*a + gamma*r.

    Raises:
        ValueError: If a component lies outside [0, 10]
    """
    for value in (s, a, r):
        if not SCORE_MIN <= value <= SCORE_MAX:
            raise ValueError(f"Component score must be within [0, 10], got {value}")
    total = round(math.fsum((w.alpha * s, w.beta * a, w.gamma * r)), REL_DECIMALS)
    return min(SCORE_MAX, max(SCORE_MIN, total))


def relevance_score(s: float, a: float, r: float, w: WeightConfig) -> RelevanceScore:
    return RelevanceScore(s_semantic=s, a_structural=a, r_reasoning=r, rel=combine(s, a, r, w))


def reweight(scored: Sequence[ScoredExample], w: WeightConfig) -> List[ScoredExample]:
    """Recombine stored components under other weights; selection flags are cleared."""
    return [
        replace(
            item,
            score=relevance_score(item.score.s_semantic, item.score.a_structural, item.score.r_reasoning, w),
            selected=False,
            fallback=False,
        )
        for item in scored
    ]


def filter_by_threshold(scored: Sequence[ScoredExample], theta: float) -> List[ScoredExample]:
    """Mark selected = rel >= theta on every item, keeping order and length."""
    if not SCORE_MIN <= theta <= SCORE_MAX:
        raise ConfigurationError(f"theta must be within [0, 10], got {theta}")
    return [replace(item, selected=item.rel >= theta, fallback=False) for item in scored]


def fallback_selection(scored: Sequence[ScoredExample], k: int = 3) -> List[ScoredExample]:
    """
    Select the top-k examples by relevance when the threshold kept none.

    Ties are broken by the lower ordinal. Lists that already have a
    selected item are returned unchanged.
    """
    if k < 1:
        raise ConfigurationError(f"fallback k must be >= 1, got {k}")
    items = list(scored)
    if not items or any(item.selected for item in items):
        return items

    ranked = sorted(range(len(items)), key=lambda i: (-items[i].rel, items[i].example.ordinal))
    chosen = set(ranked[:k])
    logger.warning(
        f"Case {items[0].example.test_case_id}: no example passed the threshold, "
        f"falling back to the top {len(chosen)}"
    )
    return [replace(item, selected=True, fallback=True) if i in chosen else item for i, item in enumerate(items)]


def select_examples(scored: Sequence[ScoredExample], theta: float, k: int = 3) -> List[ScoredExample]:
    return fallback_selection(filter_by_threshold(scored, theta), k)


def selected_in_prompt_order(scored: Sequence[ScoredExample]) -> List[ScoredExample]:
    """Selected examples by descending relevance, ties by ordinal."""
    return sorted((item for item in scored if item.selected), key=lambda item: (-item.rel, item.example.ordinal))
