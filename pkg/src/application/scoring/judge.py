# src/application/scoring/judge.py
import logging
import re
from dataclasses import dataclass
from typing import Optional, Tuple

from ...domain.entities.example import GeneratedExample
from ...domain.entities.llm import ChatRequest, StageTag
from ...domain.entities.run_config import StageModelConfig
from ...domain.entities.scoring import ScoredExample, WeightConfig
from ...infrastructure.llm.client import LLMClient
from ..prompts.builders import build_filtering_prompt
from .relevance import relevance_score

logger = logging.getLogger(__name__)

NUMBER = r"(\d+(?:\.\d+)?)"
# the score follows the label's colon, so rubric numbers inside the label are skipped
LABELLED_PATTERNS = (
    re.compile(rf"semantic[^:\n]*:[ \t*]*{NUMBER}", re.IGNORECASE),
    re.compile(rf"(?:keyword|structural)[^:\n]*:[ \t*]*{NUMBER}", re.IGNORECASE),
    re.compile(rf"reasoning[^:\n]*:[ \t*]*{NUMBER}", re.IGNORECASE),
)
RUBRIC = re.compile(r"\(?\s*(?:up to|out of)\s+\d+\s+points?\s*\)?", re.IGNORECASE)
BARE_INTEGER = re.compile(r"(?<![\d.])\d+(?![\d.])")

Components = Tuple[float, float, float]


@dataclass(frozen=True)
class Judgement:
    s: float
    a: float
    r: float
    failed: bool = False

    @property
    def components(self) -> Components:
        return self.s, self.a, self.r


def parse_component_scores(reply: str) -> Optional[Components]:
    """
    Read the semantic, structural and reasoning scores from a judge reply.

    Labelled scores (the number after each label's colon) are used when all
    three labels are present; otherwise the first three integers within
    [0, 10] are taken in order, ignoring "up to N points" rubric text.
    Returns None when neither reading yields three scores.
    """
    labelled = [pattern.search(reply) for pattern in LABELLED_PATTERNS]
    if all(labelled):
        values = tuple(float(match.group(1)) for match in labelled)
        if all(0 <= v <= 10 for v in values):
            return values

    in_range = [int(token) for token in BARE_INTEGER.findall(RUBRIC.sub(" ", reply)) if 0 <= int(token) <= 10]
    if len(in_range) >= 3:
        return float(in_range[0]), float(in_range[1]), float(in_range[2])
    return None


def judge_components(
    test_question: str, example: GeneratedExample, client: LLMClient, stage: StageModelConfig
) -> Judgement:
    """
    Have the judge model score one example against the test question.

    An unreadable reply is retried once with a fresh call; two unreadable
    replies give (0, 0, 0) with failed=True. Transport errors propagate.
    """
    if not example.parse_ok:
        raise ValueError(f"Example {example.test_case_id}/{example.ordinal} did not parse and cannot be judged")

    prompt = build_filtering_prompt(test_question, example.question, example.reasoning_path)
    for attempt in range(2):
        request = ChatRequest(
            model=stage.model,
            prompt=prompt,
            temperature=stage.temperature,
            max_tokens=stage.max_tokens,
            stage_tag=StageTag.SCORING,
            attempt=attempt,
        )
        components = parse_component_scores(client.complete(request))
        if components is not None:
            return Judgement(*components)

    logger.warning(f"Case {example.test_case_id}: judge reply for example {example.ordinal} unreadable twice")
    return Judgement(0.0, 0.0, 0.0, failed=True)


def score_example(
    test_question: str,
    example: GeneratedExample,
    client: LLMClient,
    stage: StageModelConfig,
    weights: WeightConfig,
) -> ScoredExample:
    judgement = judge_components(test_question, example, client, stage)
    return ScoredExample(
        example=example,
        score=relevance_score(*judgement.components, weights),
        scoring_failed=judgement.failed,
    )
