# src/domain/interfaces/llm_backend.py
from abc import ABC, abstractmethod
from ..entities.llm import BackendKind, ChatRequest, EmbeddingVector


class LLMBackend(ABC):
    """Interface for chat-completion and embedding providers.

    Implementations must be safe to call from several worker threads.
    """

    kind: BackendKind

    @abstractmethod
    def complete(self, request: ChatRequest) -> str:
        """Return the model's text for a single-shot prompt."""
        pass

    @abstractmethod
    def embed(self, text: str, model: str) -> EmbeddingVector:
        """Return the embedding of `text` under `model`."""
        pass
