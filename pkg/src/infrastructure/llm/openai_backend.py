# src/infrastructure/llm/openai_backend.py
import logging
import os
import threading
from typing import Any, Optional

import backoff
import openai
from openai import OpenAI

from ...domain.entities.llm import BackendKind, ChatRequest, EmbeddingVector
from ...domain.errors import ConfigurationError, TransportError
from ...domain.interfaces.llm_backend import LLMBackend

logger = logging.getLogger(__name__)

# APITimeoutError is a subclass of APIConnectionError
TRANSIENT_ERRORS = (openai.APIConnectionError, openai.RateLimitError, openai.InternalServerError)
AUTH_ERRORS = (openai.AuthenticationError, openai.PermissionDeniedError)


class OpenAIBackend(LLMBackend):
    """Backend for any endpoint speaking the OpenAI chat/embeddings protocol."""

    kind = BackendKind.HTTP_API

    def __init__(
        self,
        base_url: Optional[str] = None,
        api_key_env: str = "OPENAI_API_KEY",
        max_attempts: int = 5,
        client: Optional[Any] = None,
        timeout_s: float = 120.0,
        backoff_factor: float = 1.0,
    ):
        if max_attempts < 1:
            raise ConfigurationError(f"max_attempts must be >= 1, got {max_attempts}")
        if client is None:
            api_key = os.getenv(api_key_env)
            if not api_key:
                raise ConfigurationError(f"Environment variable {api_key_env} with the API key is not set")
            # retries are handled here, not by the SDK
            client = OpenAI(base_url=base_url, api_key=api_key, max_retries=0, timeout=timeout_s)
        self.client = client
        self.max_attempts = max_attempts
        self.calls = 0
        self._lock = threading.Lock()

        retry = backoff.on_exception(
            backoff.expo,
            TRANSIENT_ERRORS,
            max_tries=max_attempts,
            factor=backoff_factor,
            logger=logger,
        )
        self._chat = retry(self._chat_once)
        self._embed = retry(self._embed_once)

    def _count(self) -> None:
        with self._lock:
            self.calls += 1

    def _chat_once(self, request: ChatRequest) -> str:
        self._count()
        response = self.client.chat.completions.create(
            model=request.model,
            messages=[{"role": "user", "content": request.prompt}],
            temperature=request.temperature,
            max_tokens=request.max_tokens,
        )
        return response.choices[0].message.content or ""

    def _embed_once(self, text: str, model: str) -> EmbeddingVector:
        self._count()
        response = self.client.embeddings.create(model=model, input=text)
        return EmbeddingVector(values=tuple(float(v) for v in response.data[0].embedding), model=model)

    def _guarded(self, call, *args):
        try:
            return call(*args)
        except AUTH_ERRORS as e:
            raise ConfigurationError(f"Authentication rejected by the endpoint: {e}") from e
        except TRANSIENT_ERRORS as e:
            raise TransportError(f"Request failed after {self.max_attempts} attempts: {e}") from e
        except openai.APIError as e:
            raise TransportError(f"Request rejected by the endpoint: {e}") from e

    def complete(self, request: ChatRequest) -> str:
        return self._guarded(self._chat, request)

    def embed(self, text: str, model: str) -> EmbeddingVector:
        return self._guarded(self._embed, text, model)
