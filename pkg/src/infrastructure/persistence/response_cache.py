# src/infrastructure/persistence/response_cache.py
"""Append-only, content-addressed record of model responses.

Each line of the JSONL file holds one successful call:
{key, stage_tag, model, prompt_sha256, response, timestamp}.
Replaying a run only needs the keys and responses.
"""
import json
import logging
import os
import threading
from datetime import datetime, timezone
from hashlib import sha256
from typing import Any, Dict, Optional

from ...domain.entities.llm import ChatRequest

logger = logging.getLogger(__name__)


def prompt_digest(prompt: str) -> str:
    return sha256(prompt.encode("utf-8")).hexdigest()


def request_key(request: ChatRequest) -> str:
    identity: Dict[str, Any] = {
        "model": request.model,
        "prompt": request.prompt,
        "temperature": request.temperature,
        "stage_tag": request.stage_tag.value,
    }
    if request.attempt:
        identity["attempt"] = request.attempt
    canonical = json.dumps(identity, sort_keys=True, ensure_ascii=True, separators=(",", ":"))
    return sha256(canonical.encode("utf-8")).hexdigest()


def embedding_key(text: str, model: str) -> str:
    canonical = json.dumps(
        {"model": model, "text": text, "stage_tag": "embedding"},
        sort_keys=True,
        ensure_ascii=True,
        separators=(",", ":"),
    )
    return sha256(canonical.encode("utf-8")).hexdigest()


class ResponseCache:
    def __init__(self, path: Optional[str] = None):
        self.path = path
        self.entries: Dict[str, Any] = {}
        self.hits = 0
        self.misses = 0
        self._lock = threading.Lock()
        if path and os.path.exists(path):
            self._load(path)

    def _load(self, path: str) -> None:
        with open(path, encoding="utf-8") as handle:
            for line_no, line in enumerate(handle, start=1):
                if not line.strip():
                    continue
                try:
                    record = json.loads(line)
                except json.JSONDecodeError:
                    # a torn last line from an interrupted run
                    logger.warning(f"Skipping unreadable cache line {line_no} in {path}")
                    continue
                self.entries[record["key"]] = record["response"]
        logger.debug(f"Loaded {len(self.entries)} cached responses from {path}")

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, key: str) -> bool:
        return key in self.entries

    def get(self, key: str) -> Optional[Any]:
        with self._lock:
            if key in self.entries:
                self.hits += 1
                return self.entries[key]
            self.misses += 1
            return None

    def put(self, key: str, response: Any, stage_tag: str, model: str, prompt: str) -> None:
        record = {
            "key": key,
            "stage_tag": stage_tag,
            "model": model,
            "prompt_sha256": prompt_digest(prompt),
            "response": response,
            "timestamp": datetime.now(timezone.utc).isoformat(),
        }
        with self._lock:
            self.entries[key] = response
            if self.path:
                directory = os.path.dirname(self.path)
                if directory:
                    os.makedirs(directory, exist_ok=True)
                with open(self.path, "a", encoding="utf-8", newline="\n") as handle:
                    handle.write(json.dumps(record, sort_keys=True, ensure_ascii=False) + "\n")
