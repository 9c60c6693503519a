# src/infrastructure/llm/vectors.py
from hashlib import sha256

import numpy as np

from ...domain.entities.llm import EmbeddingVector
from ...domain.errors import DegenerateVectorError

HASH_DIMENSION = 64


def hash_embedding(text: str, model: str = "hash-64", seed: int = 0, dimension: int = HASH_DIMENSION) -> EmbeddingVector:
    """Deterministic unit vector derived from a seeded hash of the text."""
    digest = sha256(f"{seed}:{model}:{text}".encode("utf-8")).digest()
    rng = np.random.default_rng(int.from_bytes(digest[:8], "little"))
    values = rng.standard_normal(dimension)
    values = values / np.linalg.norm(values)
    return EmbeddingVector(values=tuple(float(v) for v in values), model=model)


def cosine(a: EmbeddingVector, b: EmbeddingVector) -> float:
    if len(a) != len(b):
        raise DegenerateVectorError(f"Vector lengths differ: {len(a)} vs {len(b)}")
    va = np.asarray(a.values, dtype=float)
    vb = np.asarray(b.values, dtype=float)
    norm_a = np.linalg.norm(va)
    norm_b = np.linalg.norm(vb)
    if norm_a == 0 or norm_b == 0:
        raise DegenerateVectorError("Cosine similarity is undefined for a zero vector")
    value = float(np.dot(va, vb) / (norm_a * norm_b))
    return max(-1.0, min(1.0, value))
