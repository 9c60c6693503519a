# src/domain/entities/scoring.py
import math
from dataclasses import dataclass
from typing import Any, Dict

from ..errors import ConfigurationError
from .example import GeneratedExample

SCORE_MIN = 0.0
SCORE_MAX = 10.0


@dataclass(frozen=True)
class WeightConfig:
    """Weights of the semantic, structural and reasoning components."""
    alpha: float = 1 / 3
    beta: float = 1 / 3
    gamma: float = 1 / 3

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ConfigurationError(f"Weight {name} must be a non-negative number, got {value}")
        total = math.fsum((self.alpha, self.beta, self.gamma))
        if abs(total - 1.0) > 1e-9:
            raise ConfigurationError(f"Weights must sum to 1, got {total}")

    @property
    def label(self) -> str:
        return f"{self.alpha:.2f}/{self.beta:.2f}/{self.gamma:.2f}"

    def to_dict(self) -> Dict[str, float]:
        return {"alpha": self.alpha, "beta": self.beta, "gamma": self.gamma}

    @classmethod
    def from_dict(cls, data: Dict[str, float]) -> "WeightConfig":
        return cls(alpha=data["alpha"], beta=data["beta"], gamma=data["gamma"])


@dataclass(frozen=True)
class RelevanceScore:
    s_semantic: float
    a_structural: float
    r_reasoning: float
    rel: float

    def __post_init__(self):
        for name in ("s_semantic", "a_structural", "r_reasoning", "rel"):
            value = getattr(self, name)
            if not SCORE_MIN <= value <= SCORE_MAX:
                raise ValueError(f"{name} must be within [0, 10], got {value}")


@dataclass(frozen=True)
class ScoredExample:
    example: GeneratedExample
    score: RelevanceScore
    selected: bool = False
    scoring_failed: bool = False
    fallback: bool = False

    @property
    def rel(self) -> float:
        return self.score.rel

    def to_dict(self) -> Dict[str, Any]:
        return {
            "test_case_id": self.example.test_case_id,
            "ordinal": self.example.ordinal,
            "question": self.example.question,
            "sql": self.example.sql,
            "reasoning_path": self.example.reasoning_path,
            "s": self.score.s_semantic,
            "a": self.score.a_structural,
            "r": self.score.r_reasoning,
            "rel": self.score.rel,
            "selected": self.selected,
            "scoring_failed": self.scoring_failed,
            "fallback": self.fallback,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ScoredExample":
        example = GeneratedExample(
            test_case_id=data["test_case_id"],
            ordinal=data["ordinal"],
            question=data["question"],
            sql=data["sql"],
            reasoning_path=data["reasoning_path"],
            parse_ok=True,
        )
        score = RelevanceScore(
            s_semantic=data["s"], a_structural=data["a"], r_reasoning=data["r"], rel=data["rel"]
        )
        return cls(
            example=example,
            score=score,
            selected=data.get("selected", False),
            scoring_failed=data.get("scoring_failed", False),
            fallback=data.get("fallback", False),
        )
