# src/domain/entities/evaluation.py
from dataclasses import asdict, dataclass
from enum import Enum
from typing import Any, Dict, Optional, Tuple

from ..errors import ConfigurationError


class Difficulty(str, Enum):
    EASY = "easy"
    MEDIUM = "medium"
    HARD = "hard"
    EXTRA = "extra"


@dataclass(frozen=True)
class DifficultyRules:
    """Upper bounds of the component count for each bucket; above hard_max is extra."""
    easy_max: int = 1
    medium_max: int = 3
    hard_max: int = 5

    def __post_init__(self):
        if not 0 <= self.easy_max <= self.medium_max <= self.hard_max:
            raise ConfigurationError(
                f"Difficulty bounds must be ordered, got {self.easy_max}/{self.medium_max}/{self.hard_max}"
            )

    def bucket(self, components: int) -> Difficulty:
        if components <= self.easy_max:
            return Difficulty.EASY
        if components <= self.medium_max:
            return Difficulty.MEDIUM
        if components <= self.hard_max:
            return Difficulty.HARD
        return Difficulty.EXTRA


@dataclass(frozen=True)
class ResultTable:
    """Rows returned by one query, in execution order."""
    columns: int
    ordered_rows: Tuple[Tuple[Any, ...], ...]

    def __post_init__(self):
        for row in self.ordered_rows:
            if len(row) != self.columns:
                raise ValueError(f"Row arity {len(row)} does not match column count {self.columns}")

    @property
    def rows(self) -> Tuple[Tuple[Any, ...], ...]:
        # multiset view; comparison code sorts before matching
        return self.ordered_rows


@dataclass(frozen=True)
class EvalOutcome:
    test_case_id: int
    ex: bool
    em: bool
    difficulty: Difficulty
    diagnostics: Optional[str] = None
    gold_invalid: bool = False
    fallback_used: bool = False

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["difficulty"] = self.difficulty.value
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "EvalOutcome":
        return cls(
            test_case_id=data["test_case_id"],
            ex=data["ex"],
            em=data["em"],
            difficulty=Difficulty(data["difficulty"]),
            diagnostics=data.get("diagnostics"),
            gold_invalid=data.get("gold_invalid", False),
            fallback_used=data.get("fallback_used", False),
        )
