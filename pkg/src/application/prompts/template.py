# src/application/prompts/template.py
import os
import re
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Dict, Iterable, Tuple

from ...domain.errors import TemplateError

SLOT_PATTERN = re.compile(r"\{([a-z_]+)\}")
TEMPLATE_DIR = os.path.join(os.path.dirname(__file__), "templates")


class PromptStage(str, Enum):
    SCHEMA_LINKING = "schema_linking"
    EXAMPLE_GENERATION = "example_generation"
    EXAMPLE_FILTERING = "example_filtering"
    FINAL_INFERENCE = "final_inference"


@dataclass(frozen=True)
class PromptTemplate:
    stage: PromptStage
    body: str
    slot_names: Tuple[str, ...]

    def __post_init__(self):
        in_body = set(SLOT_PATTERN.findall(self.body))
        declared = set(self.slot_names)
        if in_body != declared:
            raise TemplateError(
                ",".join(sorted(in_body ^ declared)),
                f"Template {self.stage.value}: slots in body {sorted(in_body)} != declared {sorted(declared)}",
            )

    def fill(self, values: Dict[str, str], optional: Iterable[str] = ()) -> str:
        """Substitute every slot in one pass; values are never re-scanned for slots."""
        optional = set(optional)
        for name in self.slot_names:
            value = values.get(name)
            if value is None or (name not in optional and not value.strip()):
                raise TemplateError(name)
        text = SLOT_PATTERN.sub(lambda match: values[match.group(1)], self.body)
        return text.replace("\r\n", "\n").replace("\r", "\n")


def _read_resource(name: str) -> str:
    path = os.path.join(TEMPLATE_DIR, name)
    with open(path, encoding="utf-8", newline="") as handle:
        return handle.read().rstrip("\n")


@lru_cache(maxsize=None)
def load_template(stage: PromptStage) -> PromptTemplate:
    body = _read_resource(f"{stage.value}.txt")
    slots = tuple(dict.fromkeys(SLOT_PATTERN.findall(body)))
    return PromptTemplate(stage=stage, body=body, slot_names=slots)
