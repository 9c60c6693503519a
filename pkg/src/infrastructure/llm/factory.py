# src/infrastructure/llm/factory.py
import logging
import os
from typing import Dict, Optional

from ...domain.entities.llm import BackendKind, StageTag
from ...domain.entities.run_config import RunConfig
from ...domain.errors import ConfigurationError
from ...domain.interfaces.llm_backend import LLMBackend
from ..persistence.response_cache import ResponseCache
from .client import LLMClient
from .mock_backends import HashBackend, ScriptedBackend
from .openai_backend import OpenAIBackend
from .rate_limiter import TokenBucket
from .replay_backend import ReplayBackend

logger = logging.getLogger(__name__)

CACHE_FILE = "cache.jsonl"

StageClients = Dict[StageTag, LLMClient]


def cache_path_for(config: RunConfig, run_dir: str) -> str:
    return config.cache_path or os.path.join(run_dir, CACHE_FILE)


def build_clients(config: RunConfig, run_dir: str, cache: Optional[ResponseCache] = None) -> StageClients:
    """
    Build one client per stage, sharing a single cache and rate limiter.

    Backends of the same kind are shared too, so call counters and
    scripted histories cover the whole run.
    """
    cache = cache if cache is not None else ResponseCache(cache_path_for(config, run_dir))
    limiter = TokenBucket(config.requests_per_minute)
    backends: Dict[BackendKind, LLMBackend] = {}

    def backend_for(kind: BackendKind) -> LLMBackend:
        if kind in backends:
            return backends[kind]
        if kind == BackendKind.HTTP_API:
            backend: LLMBackend = OpenAIBackend(
                base_url=config.base_url,
                api_key_env=config.api_key_env,
                max_attempts=config.max_attempts,
            )
        elif kind == BackendKind.MOCK_SCRIPTED:
            if not config.scripted_responses:
                raise ConfigurationError("mock_scripted backend requires scripted_responses")
            backend = ScriptedBackend.from_file(config.scripted_responses, seed=config.seed)
        elif kind == BackendKind.MOCK_HASH:
            backend = HashBackend(seed=config.seed)
        elif kind == BackendKind.REPLAY_CACHE:
            backend = ReplayBackend(cache)
        else:
            raise ConfigurationError(f"Unknown backend: {kind}")
        backends[kind] = backend
        return backend

    clients = {}
    for tag in StageTag:
        stage = config.stage(tag)
        clients[tag] = LLMClient(backend_for(stage.backend), cache=cache, rate_limiter=limiter)
        logger.debug(f"Stage {tag.value}: {stage.backend.value} / {stage.model}")
    return clients
