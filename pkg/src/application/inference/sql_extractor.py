# src/application/inference/sql_extractor.py
import re
from typing import Optional

from ...domain.errors import ExtractionFailedError

FENCE_PATTERN = re.compile(r"```[ \t]*(?:sql|sqlite)?[ \t]*\n?(.*?)(?:```|\Z)", re.IGNORECASE | re.DOTALL)
KEYWORD = r"(?P<keyword>select\b|with\s+\w+(?:\s*\([^)]*\))?\s+as\s*\(|insert\s+into\b)"
# a statement opens a line or follows a label's colon; "select" inside prose does not count
STATEMENT_START = re.compile(rf"(?:^|(?<=:))[ \t]*{KEYWORD}", re.IGNORECASE | re.MULTILINE)
# inline fallback for replies like "Sure! SELECT ...": upper-case keywords only
INLINE_START = re.compile(r"\b(?P<keyword>SELECT\b|WITH\s+\w+(?:\s*\([^)]*\))?\s+AS\s*\(|INSERT\s+INTO\b)")
QUOTES = "'\"`"


def _statement_start(text: str) -> Optional[int]:
    match = STATEMENT_START.search(text) or INLINE_START.search(text)
    return match.start("keyword") if match else None


def _first_statement(text: str, stop_at_blank_line: bool = True) -> str:
    """
    Cut at the first semicolon outside quotes, collapsing whitespace on the way.

    Outside a fence a blank line also ends the statement; inside a fence
    only the closing fence does.
    """
    out = []
    quote = None
    i = 0
    while i < len(text):
        char = text[i]
        if quote:
            out.append(char)
            if char == quote:
                quote = None
            i += 1
            continue
        if char in QUOTES:
            quote = char
            out.append(char)
            i += 1
        elif char == ";":
            break
        elif char.isspace():
            j = i
            while j < len(text) and text[j].isspace():
                j += 1
            if stop_at_blank_line and text.count("\n", i, j) >= 2:
                break
            out.append(" ")
            i = j
        else:
            out.append(char)
            i += 1
    return "".join(out).strip()


def extract_sql(raw: str) -> str:
    """
    Pull the first SQL statement out of a model reply.

    Markdown fences and leading labels are dropped, as is anything after the
    first statement. The result has no trailing semicolon and extracting
    from it again returns it unchanged.

    Raises:
        ExtractionFailedError: If the reply holds no SELECT, WITH or INSERT statement
    """
    text = raw or ""
    from_fence = False
    fenced = FENCE_PATTERN.search(text)
    if fenced and _statement_start(fenced.group(1)) is not None:
        text = fenced.group(1)
        from_fence = True
    start = _statement_start(text)
    if start is None:
        raise ExtractionFailedError(raw)
    statement = _first_statement(text[start:], stop_at_blank_line=not from_fence)
    if not statement:
        raise ExtractionFailedError(raw)
    return statement
