# src/domain/entities/example.py
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Tuple


@dataclass(frozen=True)
class SchemaLinking:
    test_case_id: int
    linked_elements: str = ""
    referenced_tables: Tuple[str, ...] = ()
    linking_failed: bool = False
    skipped: bool = False

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["referenced_tables"] = list(self.referenced_tables)
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SchemaLinking":
        return cls(
            test_case_id=data["test_case_id"],
            linked_elements=data.get("linked_elements", ""),
            referenced_tables=tuple(data.get("referenced_tables", ())),
            linking_failed=data.get("linking_failed", False),
            skipped=data.get("skipped", False),
        )


@dataclass(frozen=True)
class GeneratedExample:
    """One (similar question, SQL, reasoning path) triplet.

    Stubs (parse_ok=False) keep ordinals dense when the model produced
    fewer blocks than requested; they carry the raw reply for audit.
    """
    test_case_id: int
    ordinal: int
    question: str = ""
    sql: str = ""
    reasoning_path: str = ""
    parse_ok: bool = False
    raw_text: str = field(default="", compare=False)

    def __post_init__(self):
        if self.parse_ok and not (self.question and self.sql and self.reasoning_path):
            raise ValueError(f"Example {self.test_case_id}/{self.ordinal} marked parse_ok with an empty field")

    @classmethod
    def stub(cls, test_case_id: int, ordinal: int, raw_text: str) -> "GeneratedExample":
        return cls(test_case_id=test_case_id, ordinal=ordinal, parse_ok=False, raw_text=raw_text)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        if self.parse_ok:
            data.pop("raw_text")
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "GeneratedExample":
        return cls(
            test_case_id=data["test_case_id"],
            ordinal=data["ordinal"],
            question=data.get("question", ""),
            sql=data.get("sql", ""),
            reasoning_path=data.get("reasoning_path", ""),
            parse_ok=data.get("parse_ok", False),
            raw_text=data.get("raw_text", ""),
        )
