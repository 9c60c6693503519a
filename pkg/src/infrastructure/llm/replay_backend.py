# src/infrastructure/llm/replay_backend.py
from ...domain.entities.llm import BackendKind, ChatRequest, EmbeddingVector
from ...domain.errors import CacheMissError
from ...domain.interfaces.llm_backend import LLMBackend
from ..persistence.response_cache import ResponseCache, embedding_key, request_key


class ReplayBackend(LLMBackend):
    """Serves only what a previous run recorded; any miss is an error."""

    kind = BackendKind.REPLAY_CACHE

    def __init__(self, cache: ResponseCache):
        self.cache = cache

    def complete(self, request: ChatRequest) -> str:
        key = request_key(request)
        response = self.cache.get(key)
        if response is None:
            raise CacheMissError(key)
        return response

    def embed(self, text: str, model: str) -> EmbeddingVector:
        key = embedding_key(text, model)
        values = self.cache.get(key)
        if values is None:
            raise CacheMissError(key)
        return EmbeddingVector(values=tuple(values), model=model)
