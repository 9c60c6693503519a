# src/application/generation/block_parser.py
"""Parser for the question / SQL / reasoning blocks of an example-generation reply."""
import re
from typing import List, Optional, Tuple

# one header per line: optional markdown or numbering, the label, an optional index, a colon
HEADER_PATTERN = re.compile(
    r"^(?:[ \t#>*\-]|example[ \t]*\d+[ \t]*[:.)]?|\d+[ \t]*[.)])*"
    r"(similar[ \t]+question|sql[ \t]+query|reasoning[ \t]+path)"
    r"(?:[ \t]*\d+)?[ \t]*(?:\*\*)?[ \t]*:(?:[ \t]*\*\*)?",
    re.IGNORECASE | re.MULTILINE,
)
FENCE_PATTERN = re.compile(r"```[ \t]*(?:sql|sqlite)?[ \t]*\n?(.*?)```", re.IGNORECASE | re.DOTALL)
TRAILER_PATTERN = re.compile(
    r"^\s*(?:example[ \t]*\d+[ \t]*:?|\d+[ \t]*[.)]|[-*_=#]{3,}|```)\s*$", re.IGNORECASE
)

BLOCK_ORDER = ("question", "sql", "reasoning")

Triplet = Tuple[str, str, str]


def _section_kind(label: str) -> str:
    label = label.lower()
    if label.startswith("similar"):
        return "question"
    if label.startswith("sql"):
        return "sql"
    return "reasoning"


def _strip_trailers(text: str) -> str:
    lines = text.strip().splitlines()
    while lines and (not lines[-1].strip() or TRAILER_PATTERN.match(lines[-1])):
        lines.pop()
    return "\n".join(lines).strip()


def _clean_text(text: str) -> str:
    return " ".join(_strip_trailers(text).strip("*").split())


def _clean_sql(text: str) -> str:
    fenced = FENCE_PATTERN.search(text)
    body = fenced.group(1) if fenced else _strip_trailers(text)
    return body.strip().strip("`").strip().rstrip(";").strip()


def _sections(raw: str) -> List[Tuple[str, str]]:
    matches = list(HEADER_PATTERN.finditer(raw))
    sections = []
    for i, match in enumerate(matches):
        end = matches[i + 1].start() if i + 1 < len(matches) else len(raw)
        sections.append((_section_kind(match.group(1)), raw[match.end():end]))
    return sections


def _finish(block: dict) -> Optional[Triplet]:
    question = _clean_text(block["question"])
    sql = _clean_sql(block["sql"])
    reasoning = _clean_text(block["reasoning"])
    if question and sql and reasoning:
        return question, sql, reasoning
    return None


def parse_example_blocks(raw: str) -> List[Triplet]:
    """
    Split a generation reply into (question, sql, reasoning) triplets.

    Headers must appear in question, SQL, reasoning order; a block whose
    headers arrive in any other order is skipped, never repaired. Triplets
    with an empty field are dropped.
    """
    triplets: List[Triplet] = []
    block: dict = {}
    expected = 0
    for kind, content in _sections(raw or ""):
        if kind == BLOCK_ORDER[expected]:
            block[kind] = content
            expected += 1
            if expected == len(BLOCK_ORDER):
                triplet = _finish(block)
                if triplet is not None:
                    triplets.append(triplet)
                block, expected = {}, 0
        elif kind == "question":
            block, expected = {"question": content}, 1
        else:
            block, expected = {}, 0
    return triplets
