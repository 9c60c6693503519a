# src/domain/entities/llm.py
import math
from dataclasses import dataclass
from enum import Enum
from typing import Tuple

from ..errors import ConfigurationError


class StageTag(str, Enum):
    GENERATION = "generation"
    SCORING = "scoring"
    INFERENCE = "inference"
    EMBEDDING = "embedding"


class BackendKind(str, Enum):
    HTTP_API = "http_api"
    MOCK_SCRIPTED = "mock_scripted"
    MOCK_HASH = "mock_hash"
    REPLAY_CACHE = "replay_cache"


@dataclass(frozen=True)
class ChatRequest:
    """A single-shot completion request.

    `attempt` is zero for first tries; retries of the same prompt carry a
    positive attempt so they are not answered from the cache.
    """
    model: str
    prompt: str
    temperature: float = 0.0
    max_tokens: int = 1024
    stage_tag: StageTag = StageTag.INFERENCE
    attempt: int = 0

    def __post_init__(self):
        if not self.prompt:
            raise ConfigurationError("ChatRequest prompt must not be empty")
        if not math.isfinite(self.temperature) or self.temperature < 0:
            raise ConfigurationError(f"Invalid temperature: {self.temperature}")
        if self.max_tokens <= 0:
            raise ConfigurationError(f"max_tokens must be positive, got {self.max_tokens}")


@dataclass(frozen=True)
class EmbeddingVector:
    values: Tuple[float, ...]
    model: str

    def __post_init__(self):
        if not all(math.isfinite(v) for v in self.values):
            raise ConfigurationError(f"Embedding from {self.model} contains non-finite values")

    def __len__(self) -> int:
        return len(self.values)
