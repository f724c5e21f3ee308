"""Structured information-need queries and query-message similarity features.

A query couples a category with keywords, templates (short fragments, may
contain the placeholder tokens NUMBER/NUM and LOCATION/LOC) and prototypes
(full example sentences). Each element is embedded individually; the six
similarity features are the average and maximum cosine between a message
embedding and each component's element embeddings.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import CategoryId
from .encoder import EncoderBackend
from .errors import SchemaError, ValidationError

#: placeholder literals allowed inside templates and prototypes
PLACEHOLDER_TOKENS = ("NUMBER", "NUM", "LOCATION", "LOC")

_COMPONENTS = ("keywords", "templates", "prototypes")


@dataclass(frozen=True)
class Query:
    """One information need: keywords, templates and prototypes for a category."""

    category: CategoryId
    keywords: tuple[str, ...] = ()
    templates: tuple[str, ...] = ()
    prototypes: tuple[str, ...] = ()

    def __post_init__(self):
        if not (self.keywords or self.templates or self.prototypes):
            raise ValidationError("query must have at least one non-empty component")
        for component in _COMPONENTS:
            for item in getattr(self, component):
                if not item or item != item.strip():
                    raise ValidationError(
                        f"query {component} entries must be trimmed, non-empty strings"
                    )


@dataclass(frozen=True)
class QueryEmbeddings:
    """Element embeddings per component, bound to one encoder identity."""

    keywords: np.ndarray
    templates: np.ndarray
    prototypes: np.ndarray
    backend_identity: str


@dataclass(frozen=True)
class SimilarityFeatures:
    """Fixed-order 6-vector: avg/max cosine per query component."""

    kw_avg: float
    kw_max: float
    tpl_avg: float
    tpl_max: float
    proto_avg: float
    proto_max: float

    def as_array(self) -> np.ndarray:
        return np.array(
            [
                self.kw_avg,
                self.kw_max,
                self.tpl_avg,
                self.tpl_max,
                self.proto_avg,
                self.proto_max,
            ]
        )


def parse_query(path: str | Path) -> Query:
    """Load a query from a JSON file with category/keywords/templates/prototypes."""
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path.name}: invalid JSON ({exc.msg})") from exc
    if not isinstance(data, dict):
        raise SchemaError(f"{path.name}: query file must hold a JSON object")
    for key in ("category", "keywords", "templates", "prototypes"):
        if key not in data:
            raise SchemaError(f"{path.name}: missing required field {key!r}")
    if not isinstance(data["category"], str):
        raise SchemaError(f"{path.name}: 'category' must be a string")
    components: dict[str, tuple[str, ...]] = {}
    for key in _COMPONENTS:
        value = data[key]
        if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
            raise SchemaError(f"{path.name}: {key!r} must be an array of strings")
        components[key] = tuple(v.strip() for v in value if v.strip())
    return Query(category=CategoryId.from_name(data["category"]), **components)


def query_to_record(query: Query) -> dict:
    return {
        "category": query.category.value,
        "keywords": list(query.keywords),
        "templates": list(query.templates),
        "prototypes": list(query.prototypes),
    }


_EMBED_CACHE: dict[tuple[Query, str], QueryEmbeddings] = {}


def embed_query(query: Query, backend: EncoderBackend) -> QueryEmbeddings:
    """Embed each query element individually; results cached per backend."""
    key = (query, backend.identity)
    cached = _EMBED_CACHE.get(key)
    if cached is not None:
        return cached

    def _encode(items: tuple[str, ...]) -> np.ndarray:
        if not items:
            return np.zeros((0, backend.dim))
        return backend.encode(list(items))

    embeddings = QueryEmbeddings(
        keywords=_encode(query.keywords),
        templates=_encode(query.templates),
        prototypes=_encode(query.prototypes),
        backend_identity=backend.identity,
    )
    _EMBED_CACHE[key] = embeddings
    return embeddings


def _component_stats(msg_emb: np.ndarray, elements: np.ndarray) -> tuple[float, float]:
    if elements.shape[0] == 0:
        return 0.0, 0.0
    if elements.shape[1] != msg_emb.shape[0]:
        raise ValidationError(
            f"dimension mismatch: message {msg_emb.shape[0]}, query {elements.shape[1]}"
        )
    msg_norm = np.linalg.norm(msg_emb)
    elem_norms = np.linalg.norm(elements, axis=1)
    denom = msg_norm * elem_norms
    cosines = np.where(denom > 0, elements @ msg_emb / np.where(denom > 0, denom, 1.0), 0.0)
    return float(cosines.mean()), float(cosines.max())


def similarity_features(msg_emb: np.ndarray, qe: QueryEmbeddings) -> SimilarityFeatures:
    """Average and maximum cosine between the message and each component."""
    msg_emb = np.asarray(msg_emb, dtype=float)
    kw_avg, kw_max = _component_stats(msg_emb, qe.keywords)
    tpl_avg, tpl_max = _component_stats(msg_emb, qe.templates)
    proto_avg, proto_max = _component_stats(msg_emb, qe.prototypes)
    return SimilarityFeatures(kw_avg, kw_max, tpl_avg, tpl_max, proto_avg, proto_max)
