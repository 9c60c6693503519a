# tests/infrastructure/test_llm_client.py
import json

import pytest

from src.domain.entities.llm import BackendKind, ChatRequest, StageTag
from src.domain.entities.run_config import RunConfig
from src.domain.errors import CacheMissError, ConfigurationError
from src.infrastructure.llm.client import LLMClient
from src.infrastructure.llm.factory import CACHE_FILE, build_clients
from src.infrastructure.llm.mock_backends import HashBackend, ScriptedBackend, ScriptRule
from src.infrastructure.llm.replay_backend import ReplayBackend
from src.infrastructure.persistence.response_cache import ResponseCache, embedding_key, request_key


def _request(prompt="Which singers are French?", **changes):
    changes.setdefault("stage_tag", StageTag.INFERENCE)
    return ChatRequest(model="m", prompt=prompt, **changes)


class TestRequestKey:
    def test_same_request_same_key(self):
        assert request_key(_request()) == request_key(_request())

    def test_max_tokens_is_not_part_of_the_key(self):
        assert request_key(_request(max_tokens=10)) == request_key(_request(max_tokens=20))

    @pytest.mark.parametrize(
        "other",
        [
            {"prompt": "Which singers are Dutch?"},
            {"temperature": 1.0},
            {"attempt": 1},
        ],
    )
    def test_identity_fields_change_the_key(self, other):
        assert request_key(_request(**other)) != request_key(_request())

    def test_model_and_stage_change_the_key(self):
        base = request_key(_request())
        assert request_key(ChatRequest(model="n", prompt="Which singers are French?")) != base
        assert request_key(_request(stage_tag=StageTag.SCORING)) != base

    def test_embedding_keys_differ_by_model(self):
        assert embedding_key("text", "a") != embedding_key("text", "b")


class TestResponseCache:
    def test_entries_survive_reopening(self, tmp_path):
        path = str(tmp_path / CACHE_FILE)
        ResponseCache(path).put("k1", "SELECT 1", "inference", "m", "prompt")
        reopened = ResponseCache(path)
        assert reopened.get("k1") == "SELECT 1"
        assert len(reopened) == 1

    def test_lines_carry_prompt_digest_not_prompt(self, tmp_path):
        path = tmp_path / CACHE_FILE
        ResponseCache(str(path)).put("k1", "r", "scoring", "m", "secret prompt")
        record = json.loads(path.read_text(encoding="utf-8"))
        assert set(record) == {"key", "stage_tag", "model", "prompt_sha256", "response", "timestamp"}
        assert "secret prompt" not in path.read_text(encoding="utf-8")

    def test_torn_line_is_skipped(self, tmp_path):
        path = tmp_path / CACHE_FILE
        ResponseCache(str(path)).put("k1", "r1", "inference", "m", "p")
        with open(path, "a", encoding="utf-8") as handle:
            handle.write('{"key": "k2", "resp')
        cache = ResponseCache(str(path))
        assert "k1" in cache
        assert "k2" not in cache

    def test_hits_and_misses_are_counted(self):
        cache = ResponseCache()
        cache.put("k", "v", "inference", "m", "p")
        cache.get("k")
        cache.get("missing")
        assert (cache.hits, cache.misses) == (1, 1)


class TestLLMClient:
    def test_second_identical_request_is_served_from_cache(self):
        backend = ScriptedBackend(default="SELECT 1")
        client = LLMClient(backend)
        assert client.complete(_request()) == "SELECT 1"
        assert client.complete(_request()) == "SELECT 1"
        assert backend.calls == 1
        assert client.backend_calls == 1

    def test_retry_attempt_reaches_the_backend(self):
        backend = ScriptedBackend(default="x")
        client = LLMClient(backend)
        client.complete(_request())
        client.complete(_request(attempt=1))
        assert backend.calls == 2

    def test_embeddings_are_cached(self):
        backend = HashBackend(seed=3)
        client = LLMClient(backend)
        first = client.embed("How many singers?", "hash-64")
        second = client.embed("How many singers?", "hash-64")
        assert first.values == second.values
        assert backend.calls == 1

    def test_empty_text_cannot_be_embedded(self):
        with pytest.raises(ValueError):
            LLMClient(HashBackend()).embed("", "hash-64")

    def test_replay_serves_recorded_responses(self, tmp_path):
        cache = ResponseCache(str(tmp_path / CACHE_FILE))
        LLMClient(ScriptedBackend(default="SELECT 2"), cache=cache).complete(_request())
        LLMClient(HashBackend(), cache=cache).embed("q", "hash-64")

        recorded = ResponseCache(str(tmp_path / CACHE_FILE))
        replay = LLMClient(ReplayBackend(recorded), cache=recorded)
        assert replay.complete(_request()) == "SELECT 2"
        assert len(replay.embed("q", "hash-64")) == 64

    def test_replay_miss_is_an_error(self):
        cache = ResponseCache()
        with pytest.raises(CacheMissError):
            LLMClient(ReplayBackend(cache), cache=cache).complete(_request())

    def test_replay_does_not_record(self, tmp_path):
        path = tmp_path / CACHE_FILE
        cache = ResponseCache(str(path))
        cache.put(request_key(_request()), "SELECT 3", "inference", "m", "p")
        before = path.read_text(encoding="utf-8")
        LLMClient(ReplayBackend(cache), cache=cache).complete(_request())
        assert path.read_text(encoding="utf-8") == before


class TestScriptedBackend:
    def test_lookup_order(self):
        backend = ScriptedBackend(
            responses={"exact prompt": "exact"},
            rules=[ScriptRule(contains=("singer",), response="rule")],
            responder=lambda request: "responder" if "concert" in request.prompt else None,
            default="default",
        )
        assert backend.complete(_request("exact prompt")) == "exact"
        assert backend.complete(_request("a singer prompt")) == "rule"
        assert backend.complete(_request("a concert prompt")) == "responder"
        assert backend.complete(_request("anything else")) == "default"
        assert [r.prompt for r in backend.call_history][0] == "exact prompt"

    def test_unanswered_prompt_is_a_configuration_error(self):
        with pytest.raises(ConfigurationError):
            ScriptedBackend().complete(_request())

    def test_loads_rules_file(self, spider_dir):
        backend = ScriptedBackend.from_file(str(spider_dir / "scripted_responses.json"))
        reply = backend.complete(_request("please identify the schema elements"))
        assert reply.startswith("Tables: singer, concert")

    def test_hash_backend_only_embeds(self):
        with pytest.raises(ConfigurationError):
            HashBackend().complete(_request())


class TestFactory:
    def test_stages_share_cache_and_backend_instances(self, scripted_config, tmp_path):
        clients = build_clients(scripted_config, str(tmp_path))
        generation = clients[StageTag.GENERATION]
        assert generation.backend is clients[StageTag.INFERENCE].backend
        assert generation.cache is clients[StageTag.EMBEDDING].cache
        assert clients[StageTag.EMBEDDING].backend.kind == BackendKind.MOCK_HASH
        assert generation.cache.path == str(tmp_path / CACHE_FILE)

    def test_http_backend_needs_api_key(self, tmp_path, monkeypatch):
        monkeypatch.delenv("SAFESQL_TEST_MISSING_KEY", raising=False)
        config = RunConfig(
            tables_file="t", questions_file="q", db_dir="d", api_key_env="SAFESQL_TEST_MISSING_KEY"
        )
        with pytest.raises(ConfigurationError):
            build_clients(config, str(tmp_path))
