# src/application/generation/schema_linker.py
import logging
import re
from typing import List

from ...domain.entities.example import SchemaLinking
from ...domain.entities.llm import ChatRequest, StageTag
from ...domain.entities.run_config import StageModelConfig
from ...domain.entities.schema import SchemaDb
from ...domain.entities.test_case import TestCase
from ...infrastructure.llm.client import LLMClient
from ..dataset.schema_renderer import foreign_keys_slot, tables_slot
from ..prompts.builders import build_linking_prompt

logger = logging.getLogger(__name__)


def find_referenced_tables(summary: str, db: SchemaDb) -> List[str]:
    """Table names of `db` mentioned in `summary` as whole words, in order of first mention."""
    positions = []
    for name in db.table_names():
        match = re.search(rf"(?<![A-Za-z0-9_]){re.escape(name)}(?![A-Za-z0-9_])", summary, re.IGNORECASE)
        if match:
            positions.append((match.start(), name))
    return [name for _, name in sorted(positions)]


def link_schema(case: TestCase, db: SchemaDb, client: LLMClient, stage: StageModelConfig) -> SchemaLinking:
    """
    Ask the model which schema elements the question refers to.

    Args:
        case: Test case being linked
        db: Schema the question is asked against
        client: Client of the generation stage
        stage: Model settings of the generation stage

    Returns:
        SchemaLinking with the free-text summary and the tables it names.
        An empty reply yields linking_failed=True and an empty summary.
    """
    prompt = build_linking_prompt(tables_slot(db), foreign_keys_slot(db), case.question)
    request = ChatRequest(
        model=stage.model,
        prompt=prompt,
        temperature=0.0,
        max_tokens=stage.max_tokens,
        stage_tag=StageTag.GENERATION,
    )
    summary = client.complete(request).strip()
    if not summary:
        logger.warning(f"Case {case.id}: schema linking returned nothing, continuing without it")
        return SchemaLinking(test_case_id=case.id, linking_failed=True)

    return SchemaLinking(
        test_case_id=case.id,
        linked_elements=summary,
        referenced_tables=tuple(find_referenced_tables(summary, db)),
    )


def skipped_linking(case: TestCase) -> SchemaLinking:
    return SchemaLinking(test_case_id=case.id, skipped=True)
