# src/infrastructure/llm/client.py
import logging
import threading
from typing import Optional

from ...domain.entities.llm import BackendKind, ChatRequest, EmbeddingVector
from ...domain.interfaces.llm_backend import LLMBackend
from ..persistence.response_cache import ResponseCache, embedding_key, request_key
from .rate_limiter import TokenBucket

logger = logging.getLogger(__name__)


class LLMClient:
    """Cache-first front door to a backend.

    Every successful backend answer is recorded in the response cache, so a
    repeated request never reaches the backend twice.
    """

    def __init__(
        self,
        backend: LLMBackend,
        cache: Optional[ResponseCache] = None,
        rate_limiter: Optional[TokenBucket] = None,
    ):
        self.backend = backend
        self.cache = cache if cache is not None else ResponseCache()
        self.rate_limiter = rate_limiter or TokenBucket(0)
        self.backend_calls = 0
        self._lock = threading.Lock()

    @property
    def records(self) -> bool:
        return self.backend.kind != BackendKind.REPLAY_CACHE

    def _forward(self) -> None:
        with self._lock:
            self.backend_calls += 1
        self.rate_limiter.acquire()

    def complete(self, request: ChatRequest) -> str:
        key = request_key(request)
        cached = self.cache.get(key)
        if cached is not None:
            logger.debug(f"Cache hit for {request.stage_tag.value} request {key[:12]}")
            return cached

        self._forward()
        response = self.backend.complete(request)
        if self.records:
            self.cache.put(key, response, request.stage_tag.value, request.model, request.prompt)
        return response

    def embed(self, text: str, model: str) -> EmbeddingVector:
        if not text:
            raise ValueError("Cannot embed an empty text")
        key = embedding_key(text, model)
        cached = self.cache.get(key)
        if cached is not None:
            return EmbeddingVector(values=tuple(cached), model=model)

        self._forward()
        vector = self.backend.embed(text, model)
        if self.records:
            self.cache.put(key, list(vector.values), "embedding", model, text)
        return vector
