# src/application/generation/example_generator.py
import logging
from typing import List

from ...domain.entities.example import GeneratedExample, SchemaLinking
from ...domain.entities.llm import ChatRequest, StageTag
from ...domain.entities.run_config import StageModelConfig
from ...domain.entities.schema import SchemaDb
from ...domain.entities.test_case import TestCase
from ...domain.errors import GenerationFailedError, SqlParseError
from ...infrastructure.llm.client import LLMClient
from ..dataset.schema_renderer import foreign_keys_slot, tables_slot
from ..evaluation.sql_sketch import parse_sql
from ..prompts.builders import build_generation_prompt
from .block_parser import parse_example_blocks

logger = logging.getLogger(__name__)


def _parses(sql: str) -> bool:
    try:
        parse_sql(sql)
        return True
    except SqlParseError:
        return False


def generate_examples(
    case: TestCase,
    db: SchemaDb,
    linking: SchemaLinking,
    client: LLMClient,
    stage: StageModelConfig,
    n: int = 10,
) -> List[GeneratedExample]:
    """
    Generate `n` similar examples for one test question with a single completion.

    Triplets whose SQL does not parse are discarded; when fewer than `n`
    remain, parse_ok=False stubs fill the remaining ordinals.

    Raises:
        ValueError: If n < 1
        GenerationFailedError: If the reply holds no usable triplet
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")

    prompt = build_generation_prompt(linking.linked_elements, tables_slot(db), foreign_keys_slot(db), case.question)
    request = ChatRequest(
        model=stage.model,
        prompt=prompt,
        temperature=stage.temperature,
        max_tokens=stage.max_tokens,
        stage_tag=StageTag.GENERATION,
    )
    raw = client.complete(request)

    triplets = [t for t in parse_example_blocks(raw) if _parses(t[1])][:n]
    if not triplets:
        raise GenerationFailedError(f"Case {case.id}: no parseable example in the generation reply", raw)

    examples = [
        GeneratedExample(
            test_case_id=case.id,
            ordinal=ordinal,
            question=question,
            sql=sql,
            reasoning_path=reasoning,
            parse_ok=True,
        )
        for ordinal, (question, sql, reasoning) in enumerate(triplets)
    ]
    if len(examples) < n:
        logger.info(f"Case {case.id}: parsed {len(examples)} of {n} examples")
        examples.extend(GeneratedExample.stub(case.id, ordinal, raw) for ordinal in range(len(examples), n))
    return examples
