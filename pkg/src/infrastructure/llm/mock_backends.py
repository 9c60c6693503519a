# src/infrastructure/llm/mock_backends.py
"""Deterministic offline backends for tests and desk-scale runs."""
import json
import threading
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from ...domain.entities.llm import BackendKind, ChatRequest, EmbeddingVector
from ...domain.errors import ConfigurationError
from ...domain.interfaces.llm_backend import LLMBackend
from .vectors import hash_embedding

Responder = Callable[[ChatRequest], Optional[str]]


@dataclass(frozen=True)
class ScriptRule:
    """Answer `response` when every substring in `contains` occurs in the prompt."""
    contains: Tuple[str, ...]
    response: str

    def matches(self, prompt: str) -> bool:
        return all(fragment in prompt for fragment in self.contains)


class ScriptedBackend(LLMBackend):
    """Returns predefined responses.

    Lookup order: exact prompt, then the first matching rule, then the
    optional responder callable, then `default`.
    """

    kind = BackendKind.MOCK_SCRIPTED

    def __init__(
        self,
        responses: Optional[Dict[str, str]] = None,
        rules: Sequence[ScriptRule] = (),
        responder: Optional[Responder] = None,
        default: Optional[str] = None,
        seed: int = 0,
    ):
        self.responses = dict(responses or {})
        self.rules = list(rules)
        self.responder = responder
        self.default = default
        self.seed = seed
        self.calls = 0
        self.call_history: List[ChatRequest] = []
        self._lock = threading.Lock()

    @classmethod
    def from_file(cls, path: str, seed: int = 0) -> "ScriptedBackend":
        """Load rules from JSON: {"responses": {...}, "rules": [{"contains": [...], "response": ...}], "default": ...}."""
        with open(path, encoding="utf-8") as handle:
            data = json.load(handle)
        rules = [ScriptRule(contains=tuple(rule["contains"]), response=rule["response"]) for rule in data.get("rules", [])]
        return cls(responses=data.get("responses"), rules=rules, default=data.get("default"), seed=seed)

    def complete(self, request: ChatRequest) -> str:
        with self._lock:
            self.calls += 1
            self.call_history.append(request)

        if request.prompt in self.responses:
            return self.responses[request.prompt]
        for rule in self.rules:
            if rule.matches(request.prompt):
                return rule.response
        if self.responder is not None:
            answer = self.responder(request)
            if answer is not None:
                return answer
        if self.default is not None:
            return self.default
        raise ConfigurationError(f"No scripted response for {request.stage_tag.value} prompt: {request.prompt[:80]!r}")

    def embed(self, text: str, model: str) -> EmbeddingVector:
        return hash_embedding(text, model=model, seed=self.seed)

    def reset(self) -> None:
        self.calls = 0
        self.call_history = []


class HashBackend(LLMBackend):
    """Embedding-only backend: seeded hash of the text to a 64-d unit vector."""

    kind = BackendKind.MOCK_HASH

    def __init__(self, seed: int = 0):
        self.seed = seed
        self.calls = 0

    def complete(self, request: ChatRequest) -> str:
        raise ConfigurationError("mock_hash backend only serves embeddings")

    def embed(self, text: str, model: str) -> EmbeddingVector:
        self.calls += 1
        return hash_embedding(text, model=model, seed=self.seed)
