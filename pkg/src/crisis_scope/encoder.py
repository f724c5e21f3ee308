"""Pluggable multilingual sentence-embedding backends and vector utilities.

Every backend maps a batch of texts to L2-normalized vectors of a fixed
dimension. The hash-based mock backend makes cross-lingual behavior testable
at desk scale: an alias table maps surface words of a pseudo-language onto
canonical words, so "translations" share character n-grams and embed to the
same point.
"""

from __future__ import annotations

import hashlib
import threading
import warnings
from abc import ABC, abstractmethod
from collections import Counter
from typing import Mapping, Sequence

import numpy as np

from .corpus import Message, normalize, split_sentences
from .errors import BackendError, ValidationError


class EncoderBackend(ABC):
    """Sentence encoder contract: fixed output dimension, deterministic."""

    name: str = "base"
    dim: int = 1024
    #: languages the backend supports; None means unrestricted
    languages: frozenset[str] | None = None
    #: whether encode() may be called from multiple threads at once
    concurrent_safe: bool = False

    @abstractmethod
    def encode(self, texts: Sequence[str]) -> np.ndarray:
        """Encode texts to an (n, dim) array of L2-normalized vectors."""

    @property
    def identity(self) -> str:
        """Stable identifier used to bind trained models to their encoder."""
        return f"{self.name}:{self.dim}"

    def supports(self, lang: str) -> bool:
        return self.languages is None or lang in self.languages


class MockEncoder(EncoderBackend):
    """Deterministic encoder hashing character 3-gram multisets.

    Each 3-gram of the (lowercased, alias-mapped) text seeds a Gaussian
    direction; the message vector is the count-weighted sum, L2-normalized.
    Texts with identical 3-gram multisets embed identically.
    """

    def __init__(
        self,
        dim: int = 1024,
        seed: int = 0,
        alias: Mapping[str, str] | None = None,
        name: str = "mock",
    ):
        if dim < 2:
            raise ValidationError("mock encoder dimension must be >= 2")
        self.dim = dim
        self.seed = seed
        self.alias = dict(alias or {})
        self.name = name
        self.concurrent_safe = False
        self._gram_cache: dict[str, np.ndarray] = {}

    @property
    def identity(self) -> str:
        return f"{self.name}:{self.dim}:{self.seed}"

    def _gram_vector(self, gram: str) -> np.ndarray:
        vec = self._gram_cache.get(gram)
        if vec is None:
            digest = hashlib.blake2b(
                f"{self.seed}:{gram}".encode("utf-8"), digest_size=8
            ).digest()
            rng = np.random.default_rng(int.from_bytes(digest, "big"))
            vec = rng.standard_normal(self.dim)
            self._gram_cache[gram] = vec
        return vec

    def _grams(self, text: str) -> Counter:
        words = [self.alias.get(w, w) for w in text.lower().split()]
        joined = " ".join(words)
        if len(joined) < 3:
            return Counter([joined])
        return Counter(joined[i : i + 3] for i in range(len(joined) - 2))

    def encode(self, texts: Sequence[str]) -> np.ndarray:
        out = np.zeros((len(texts), self.dim))
        for i, text in enumerate(texts):
            if not isinstance(text, str) or not text.strip():
                raise BackendError("cannot encode empty text", index=i)
            vec = np.zeros(self.dim)
            for gram, count in self._grams(text).items():
                vec += count * self._gram_vector(gram)
            norm = np.linalg.norm(vec)
            if norm == 0.0:
                raise BackendError("degenerate zero embedding", index=i)
            out[i] = vec / norm
        return out


class SerializingEncoder(EncoderBackend):
    """Serializes encode() calls for backends that are not concurrency-safe.

    Transparent otherwise: identity, dimension and language support pass
    through, so checkpoints trained against the inner backend still load.
    """

    def __init__(self, inner: EncoderBackend):
        self._inner = inner
        self._lock = threading.Lock()
        self.name = inner.name
        self.dim = inner.dim
        self.languages = inner.languages
        self.concurrent_safe = True

    @property
    def identity(self) -> str:
        return self._inner.identity

    def encode(self, texts: Sequence[str]) -> np.ndarray:
        with self._lock:
            return self._inner.encode(texts)


def sentence_sequence(message: Message, backend: EncoderBackend) -> np.ndarray:
    """Embed a message as the sequence of its sentence vectors (len >= 1)."""
    text = normalize(message.text)
    if not text:
        raise ValidationError(
            f"message {message.id!r} is empty after normalization; cannot embed"
        )
    return backend.encode(split_sentences(text))


def message_embedding(message: Message, backend: EncoderBackend) -> np.ndarray:
    """Single vector for the whole normalized message text."""
    text = normalize(message.text)
    if not text:
        raise ValidationError(
            f"message {message.id!r} is empty after normalization; cannot embed"
        )
    return backend.encode([text])[0]


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine similarity in [-1, 1]; zero vectors yield 0.0 with a warning."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise ValidationError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        warnings.warn("cosine of a zero vector is defined as 0.0", stacklevel=2)
        return 0.0
    return float(np.dot(u, v) / (nu * nv))
