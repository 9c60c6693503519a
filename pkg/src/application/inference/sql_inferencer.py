# src/application/inference/sql_inferencer.py
import logging
from typing import Sequence

from ...domain.entities.llm import ChatRequest, StageTag
from ...domain.entities.prediction import STATUS_FAILED, Prediction
from ...domain.entities.run_config import StageModelConfig
from ...domain.entities.schema import SchemaDb
from ...domain.entities.scoring import ScoredExample
from ...domain.entities.test_case import TestCase
from ...domain.errors import ExtractionFailedError
from ...infrastructure.llm.client import LLMClient
from ..dataset.schema_renderer import foreign_keys_slot, tables_slot
from ..prompts.builders import build_inference_prompt, format_examples
from .sql_extractor import extract_sql

logger = logging.getLogger(__name__)


def build_prompt_for(
    case: TestCase, db: SchemaDb, examples: Sequence[ScoredExample], include_reasoning: bool = True
) -> str:
    ordered = sorted(examples, key=lambda item: (-item.rel, item.example.ordinal))
    triplets = [(item.example.question, item.example.sql, item.example.reasoning_path) for item in ordered]
    return build_inference_prompt(
        tables_slot(db),
        foreign_keys_slot(db),
        case.question,
        format_examples(triplets, include_reasoning=include_reasoning),
    )


def infer_sql(
    case: TestCase,
    db: SchemaDb,
    selected: Sequence[ScoredExample],
    client: LLMClient,
    stage: StageModelConfig,
    include_reasoning: bool = True,
) -> Prediction:
    """
    Predict the SQL of one test case from its selected examples.

    Args:
        case: Test case to answer
        db: Its schema
        selected: Examples to show, in any order; they are presented by
            descending relevance. An empty list gives a zero-shot prompt.
        client: Client of the inference stage
        stage: Model settings of the inference stage
        include_reasoning: False drops the reasoning line of every example

    Returns:
        Prediction with status ok, or inference_failed carrying the raw reply
    """
    prompt = build_prompt_for(case, db, selected, include_reasoning)
    request = ChatRequest(
        model=stage.model,
        prompt=prompt,
        temperature=0.0,
        max_tokens=stage.max_tokens,
        stage_tag=StageTag.INFERENCE,
    )
    raw = client.complete(request)
    fallback_used = any(item.fallback for item in selected)
    try:
        sql = extract_sql(raw)
    except ExtractionFailedError:
        logger.warning(f"Case {case.id}: no SQL found in the inference reply")
        return Prediction(
            test_case_id=case.id,
            sql="",
            n_examples_used=len(selected),
            fallback_used=fallback_used,
            raw_response=raw,
            status=STATUS_FAILED,
        )
    return Prediction(
        test_case_id=case.id,
        sql=sql,
        n_examples_used=len(selected),
        fallback_used=fallback_used,
        raw_response=raw,
    )
