"""Embedding providers.

The deterministic hashing embedder maps a bag of tokens into a fixed
dimension via signed feature hashing and L2-normalizes the result — the same
384-wide footprint as common sentence embedders, with zero model weights.
"""

from __future__ import annotations

import hashlib
import math
import re
from collections import Counter
from dataclasses import dataclass
from typing import Protocol

import numpy as np

TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)

# Standard English stopword list (Lucene's plus the usual question/function
# words). The keyword index keeps stopwords (BM25's idf already discounts
# them); the embedder drops them because under bag-of-token hashing they swamp
# the informative overlap.
STOPWORDS = frozenset(
    """
    a about after all also an and any are as at be been before between both but by
    can could did do does down during each few for from had has have he her here him
    his how i if in into is it its just like many me more most my near no not now of
    on only or other our out over own same she should so some such than that the
    their them then there these they this those through to under up us very was we
    were what when where which while who why will with you your
    """.split()
)


def tokenize(text: str) -> list[str]:
    return [t.lower() for t in TOKEN_RE.findall(text)]


def content_tokens(text: str) -> list[str]:
    tokens = [t for t in tokenize(text) if t not in STOPWORDS]
    return tokens or tokenize(text)


@dataclass(frozen=True)
class EmbeddingVector:
    values: tuple[float, ...]
    model_id: str

    def __post_init__(self) -> None:
        if not all(math.isfinite(v) for v in self.values):
            raise ValueError("embedding contains non-finite values")

    @property
    def dimension(self) -> int:
        return len(self.values)


class Embedder(Protocol):
    model_id: str
    dimension: int

    def embed(self, text: str) -> EmbeddingVector: ...


def _token_slots(token: str, dimension: int) -> list[tuple[int, int]]:
    """Two independent (slot, sign) pairs per token.

    Spreading each token over two slots keeps single hash collisions from
    cancelling a genuine token overlap: full cancellation now needs both slots
    to collide with opposite signs.
    """
    digest = hashlib.blake2b(token.encode("utf-8"), digest_size=16).digest()
    first = int.from_bytes(digest[:8], "big")
    second = int.from_bytes(digest[8:], "big")
    slot1 = (first >> 1) % dimension
    slot2 = (second >> 1) % dimension
    if slot2 == slot1:
        slot2 = (slot2 + 1) % dimension
    return [(slot1, 1 if first & 1 else -1), (slot2, 1 if second & 1 else -1)]


class HashingEmbedder:
    """Pure function of (text, model_id): signed hashed token counts, unit norm."""

    def __init__(self, dimension: int = 384) -> None:
        self.dimension = dimension
        self.model_id = f"hashing-bow-{dimension}"

    def embed(self, text: str) -> EmbeddingVector:
        if not text or not text.strip():
            raise ValueError("cannot embed empty text")
        vec = np.zeros(self.dimension, dtype=np.float64)
        counts = Counter(content_tokens(text))
        for token, count in counts.items():
            for slot, sign in _token_slots(token, self.dimension):
                vec[slot] += sign * count
        norm = float(np.linalg.norm(vec))
        if norm < 1e-12:
            # pathological sign cancellation; fall back to unsigned counts
            for token, count in counts.items():
                for slot, _sign in _token_slots(token, self.dimension):
                    vec[slot] += count
            norm = float(np.linalg.norm(vec))
        vec /= norm
        return EmbeddingVector(tuple(float(v) for v in vec), self.model_id)


def cosine(a: EmbeddingVector, b: EmbeddingVector) -> float:
    return float(np.dot(np.asarray(a.values), np.asarray(b.values)))
