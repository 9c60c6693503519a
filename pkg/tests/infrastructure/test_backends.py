# tests/infrastructure/test_backends.py
import random
from types import SimpleNamespace

import httpx
import openai
import pytest

from src.domain.entities.llm import ChatRequest, EmbeddingVector
from src.domain.errors import ConfigurationError, DegenerateVectorError, TransportError
from src.infrastructure.llm.openai_backend import OpenAIBackend
from src.infrastructure.llm.rate_limiter import TokenBucket
from src.infrastructure.llm.vectors import cosine, hash_embedding

REQUEST = httpx.Request("POST", "http://localhost/v1/chat/completions")


class FakeCompletions:
    def __init__(self, failures, error_factory):
        self.failures = failures
        self.error_factory = error_factory
        self.calls = []

    def create(self, **kwargs):
        self.calls.append(kwargs)
        if len(self.calls) <= self.failures:
            raise self.error_factory()
        message = SimpleNamespace(content="SELECT 1")
        return SimpleNamespace(choices=[SimpleNamespace(message=message)])


class FakeEmbeddings:
    def create(self, model, input):
        return SimpleNamespace(data=[SimpleNamespace(embedding=[0.6, 0.8])])


def _client(failures=0, error_factory=None):
    completions = FakeCompletions(failures, error_factory)
    return SimpleNamespace(chat=SimpleNamespace(completions=completions), embeddings=FakeEmbeddings()), completions


def _connection_error():
    return openai.APIConnectionError(request=REQUEST)


def _auth_error():
    response = httpx.Response(401, request=REQUEST)
    return openai.AuthenticationError("bad key", response=response, body=None)


class TestOpenAIBackend:
    def test_sends_single_user_message(self):
        fake, completions = _client()
        backend = OpenAIBackend(client=fake)
        reply = backend.complete(ChatRequest(model="gpt-4o", prompt="p", temperature=0.0, max_tokens=32))
        assert reply == "SELECT 1"
        assert completions.calls[0]["messages"] == [{"role": "user", "content": "p"}]
        assert completions.calls[0]["max_tokens"] == 32

    def test_transient_errors_are_retried(self):
        fake, completions = _client(failures=2, error_factory=_connection_error)
        backend = OpenAIBackend(client=fake, max_attempts=3, backoff_factor=0)
        assert backend.complete(ChatRequest(model="m", prompt="p")) == "SELECT 1"
        assert len(completions.calls) == 3

    def test_exhausted_retries_become_transport_error(self):
        fake, completions = _client(failures=5, error_factory=_connection_error)
        backend = OpenAIBackend(client=fake, max_attempts=2, backoff_factor=0)
        with pytest.raises(TransportError):
            backend.complete(ChatRequest(model="m", prompt="p"))
        assert len(completions.calls) == 2

    def test_auth_failure_is_a_configuration_error(self):
        fake, completions = _client(failures=1, error_factory=_auth_error)
        backend = OpenAIBackend(client=fake, max_attempts=3, backoff_factor=0)
        with pytest.raises(ConfigurationError):
            backend.complete(ChatRequest(model="m", prompt="p"))
        assert len(completions.calls) == 1

    def test_embeddings(self):
        fake, _ = _client()
        vector = OpenAIBackend(client=fake).embed("text", "embed-model")
        assert vector.values == (0.6, 0.8)

    def test_missing_key(self, monkeypatch):
        monkeypatch.delenv("SAFESQL_TEST_KEY", raising=False)
        with pytest.raises(ConfigurationError):
            OpenAIBackend(api_key_env="SAFESQL_TEST_KEY")


class TestTokenBucket:
    def test_disabled_at_zero(self):
        bucket = TokenBucket(0)
        for _ in range(100):
            bucket.acquire()
        assert not bucket.enabled

    def test_waits_for_refill(self):
        now = [0.0]
        sleeps = []

        def sleep(seconds):
            sleeps.append(seconds)
            now[0] += seconds

        bucket = TokenBucket(60, clock=lambda: now[0], sleep=sleep)
        bucket.acquire()
        bucket.acquire()
        assert sleeps == [pytest.approx(1.0)]


class TestVectors:
    def test_hash_embedding_is_deterministic_unit_vector(self):
        first = hash_embedding("How many singers?", seed=1)
        assert first == hash_embedding("How many singers?", seed=1)
        assert first != hash_embedding("How many singers?", seed=2)
        assert sum(v * v for v in first.values) == pytest.approx(1.0)

    def test_cosine(self):
        a = EmbeddingVector(values=(1.0, 0.0), model="m")
        b = EmbeddingVector(values=(0.0, 2.0), model="m")
        assert cosine(a, a) == pytest.approx(1.0)
        assert cosine(a, b) == pytest.approx(0.0)

    def test_cosine_is_symmetric_and_scale_invariant(self):
        rng = random.Random(5)
        for _ in range(100):
            a = tuple(rng.uniform(-1, 1) for _ in range(8))
            b = tuple(rng.uniform(-1, 1) for _ in range(8))
            k = rng.uniform(0.01, 100)
            va, vb = EmbeddingVector(a, "m"), EmbeddingVector(b, "m")
            value = cosine(va, vb)
            assert cosine(vb, va) == pytest.approx(value, abs=1e-12)
            assert cosine(EmbeddingVector(tuple(k * x for x in a), "m"), vb) == pytest.approx(value, abs=1e-9)
            assert -1.0 <= value <= 1.0

    def test_zero_vector(self):
        a = EmbeddingVector(values=(0.0, 0.0), model="m")
        with pytest.raises(DegenerateVectorError):
            cosine(a, a)

    def test_length_mismatch(self):
        with pytest.raises(DegenerateVectorError):
            cosine(EmbeddingVector((1.0,), "m"), EmbeddingVector((1.0, 0.0), "m"))
