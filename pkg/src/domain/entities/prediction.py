# src/domain/entities/prediction.py
from dataclasses import asdict, dataclass
from typing import Any, Dict

STATUS_OK = "ok"
STATUS_FAILED = "inference_failed"
STATUS_UPSTREAM_FAILED = "upstream_failed"


@dataclass(frozen=True)
class Prediction:
    test_case_id: int
    sql: str
    n_examples_used: int = 0
    fallback_used: bool = False
    raw_response: str = ""
    status: str = STATUS_OK

    def __post_init__(self):
        if self.status == STATUS_OK and not self.sql:
            raise ValueError(f"Prediction for case {self.test_case_id} has status ok but no SQL")
        if self.n_examples_used < 0:
            raise ValueError("n_examples_used must be >= 0")

    @property
    def ok(self) -> bool:
        return self.status == STATUS_OK

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Prediction":
        fields = ("test_case_id", "sql", "n_examples_used", "fallback_used", "raw_response", "status")
        return cls(**{key: data[key] for key in fields if key in data})
