"""Regular and diversified abstractive summarization over ranked candidates.

The regular mode feeds all candidate texts, in rank order, to the generation
backend in one call. The diversified mode first picks a cluster count by mean
silhouette (k in {2,3,4}, capped at four, with a fallback to one for small
candidate sets), clusters candidate embeddings with seeded k-means, then
summarizes clusters in decreasing size order, splitting the token budget
evenly. Generation backends are pluggable; the lead-sentences extractor is
the deterministic test double.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from .corpus import split_sentences
from .errors import ValidationError
from .models import RankedCandidate

K_MAX = 4


class GenerationBackend(ABC):
    """Text generator contract: output must fit the requested token budget."""

    name: str = "base"
    #: maximum number of input tokens the backend accepts; None means unbounded
    max_input_tokens: int | None = None
    concurrent_safe: bool = False

    @abstractmethod
    def generate(self, source: str, max_tokens: int) -> str:
        """Produce a summary of ``source`` with at most ``max_tokens`` tokens."""


def count_tokens(text: str) -> int:
    return len(text.split())


class LeadGenerationBackend(GenerationBackend):
    """Deterministic test double: keeps leading sentences within the budget."""

    name = "lead"
    concurrent_safe = True

    def __init__(self, max_input_tokens: int | None = None):
        self.max_input_tokens = max_input_tokens

    def generate(self, source: str, max_tokens: int) -> str:
        if max_tokens < 1:
            raise ValidationError("token budget must be >= 1")
        sentences: list[str] = []
        for line in source.split("\n"):
            sentences.extend(split_sentences(line))
        out: list[str] = []
        used = 0
        for sentence in sentences:
            n = count_tokens(sentence)
            if used + n > max_tokens:
                if not out:
                    out.append(" ".join(sentence.split()[:max_tokens]))
                    used = max_tokens
                break
            out.append(sentence)
            used += n
        return " ".join(out)


@dataclass
class SummaryConfig:
    """Knobs for both summarization modes."""

    mode: str = "regular"
    budget: int = 150
    k_max: int = K_MAX
    seed: int = 0
    restarts: int = 10
    min_cluster_candidates: int = 8

    def validate(self) -> None:
        if self.mode not in ("regular", "diversified"):
            raise ValidationError(f"unknown summary mode {self.mode!r}")
        if self.budget < 10:
            raise ValidationError("summary budget must be >= 10 tokens")
        if not 1 <= self.k_max <= K_MAX:
            raise ValidationError(f"k_max must be between 1 and {K_MAX}")
        if self.restarts < 1:
            raise ValidationError("k-means needs at least one restart")
        if self.min_cluster_candidates < 2:
            raise ValidationError("clustering minimum must be >= 2")


@dataclass(frozen=True)
class Segment:
    """One generated block with its cluster size and source provenance."""

    text: str
    cluster_size: int
    source_ids: tuple[str, ...]


@dataclass(frozen=True)
class Summary:
    segments: tuple[Segment, ...]
    full_text: str
    mode: str
    truncated: bool = False


def summary_to_record(summary: Summary) -> dict:
    return {
        "mode": summary.mode,
        "full_text": summary.full_text,
        "segments": [
            {
                "text": s.text,
                "cluster_size": s.cluster_size,
                "source_ids": list(s.source_ids),
            }
            for s in summary.segments
        ],
        "truncated": summary.truncated,
    }


def _source_document(
    candidates: list[RankedCandidate], backend: GenerationBackend
) -> tuple[str, bool]:
    """Join candidate texts in rank order; truncate to the backend's input cap."""
    ordered = sorted(candidates, key=lambda c: c.position)
    texts = [c.text for c in ordered]
    truncated = False
    if backend.max_input_tokens is not None:
        kept: list[str] = []
        used = 0
        for text in texts:
            n = count_tokens(text)
            if used + n > backend.max_input_tokens:
                truncated = True
                break
            kept.append(text)
            used += n
        if not kept and texts:
            kept = [" ".join(texts[0].split()[: backend.max_input_tokens])]
            truncated = True
        texts = kept
    return "\n".join(texts), truncated


def summarize_regular(
    candidates: list[RankedCandidate],
    backend: GenerationBackend,
    config: SummaryConfig,
) -> Summary:
    """One generation call over all candidates with the full budget."""
    config.validate()
    if not candidates:
        raise ValidationError("cannot summarize an empty candidate list")
    source, truncated = _source_document(candidates, backend)
    text = backend.generate(source, config.budget)
    ordered = sorted(candidates, key=lambda c: c.position)
    segment = Segment(
        text=text,
        cluster_size=len(candidates),
        source_ids=tuple(c.message_id for c in ordered),
    )
    return Summary(
        segments=(segment,), full_text=text, mode="regular", truncated=truncated
    )


def _kmeans_once(
    points: np.ndarray, k: int, rng: np.random.Generator, max_iter: int = 100
) -> tuple[np.ndarray, float]:
    n = points.shape[0]
    centers = points[rng.choice(n, size=k, replace=False)].copy()
    assignments = np.full(n, -1)
    for _ in range(max_iter):
        distances = np.linalg.norm(points[:, None, :] - centers[None, :, :], axis=2)
        new_assignments = distances.argmin(axis=1)
        # Re-seed empty clusters from the point farthest from its own center.
        for cluster in range(k):
            if not np.any(new_assignments == cluster):
                farthest = distances[np.arange(n), new_assignments].argmax()
                centers[cluster] = points[farthest]
                new_assignments[farthest] = cluster
        if np.array_equal(new_assignments, assignments):
            break
        assignments = new_assignments
        for cluster in range(k):
            members = points[assignments == cluster]
            if len(members):
                centers[cluster] = members.mean(axis=0)
    inertia = float(
        np.sum((points - centers[assignments]) ** 2)
    )
    return assignments, inertia


def cluster(embeddings: np.ndarray, k: int, config: SummaryConfig) -> np.ndarray:
    """Seeded k-means with restarts; keeps the lowest-inertia assignment."""
    points = np.asarray(embeddings, dtype=float)
    if points.ndim != 2 or points.shape[0] == 0:
        raise ValidationError("expected a non-empty 2-D embedding array")
    n = points.shape[0]
    if k < 1:
        raise ValidationError("k must be >= 1")
    if k > n:
        raise ValidationError(f"cannot form {k} clusters from {n} points")
    if k == 1:
        return np.zeros(n, dtype=int)
    best: np.ndarray | None = None
    best_inertia = float("inf")
    for restart in range(config.restarts):
        rng = np.random.default_rng((config.seed, k, restart))
        assignments, inertia = _kmeans_once(points, k, rng)
        if inertia < best_inertia:
            best_inertia = inertia
            best = assignments
    return best


def mean_silhouette(points: np.ndarray, labels: np.ndarray) -> float:
    """Mean silhouette coefficient (Euclidean); singleton clusters score 0."""
    points = np.asarray(points, dtype=float)
    labels = np.asarray(labels)
    n = points.shape[0]
    unique = np.unique(labels)
    if len(unique) < 2:
        raise ValidationError("silhouette requires at least two clusters")
    distances = np.linalg.norm(points[:, None, :] - points[None, :, :], axis=2)
    scores = np.zeros(n)
    for i in range(n):
        same = labels == labels[i]
        n_same = same.sum()
        if n_same == 1:
            scores[i] = 0.0
            continue
        a = distances[i][same].sum() / (n_same - 1)
        b = min(
            distances[i][labels == other].mean() for other in unique if other != labels[i]
        )
        denom = max(a, b)
        scores[i] = 0.0 if denom == 0 else (b - a) / denom
    return float(scores.mean())


def choose_num_clusters(embeddings: np.ndarray, config: SummaryConfig) -> int:
    """Pick k in {2..k_max} by mean silhouette; small sets fall back to 1."""
    points = np.asarray(embeddings, dtype=float)
    n = points.shape[0]
    if n < config.min_cluster_candidates:
        return 1
    best_k = 1
    best_score = -np.inf
    for k in range(2, min(config.k_max, n) + 1):
        assignments = cluster(points, k, config)
        if len(np.unique(assignments)) < 2:
            continue
        score = mean_silhouette(points, assignments)
        if score > best_score:
            best_score = score
            best_k = k
    return best_k


def summarize_diversified(
    candidates: list[RankedCandidate],
    backend: GenerationBackend,
    config: SummaryConfig,
) -> Summary:
    """Cluster candidates and summarize clusters in decreasing size order."""
    config.validate()
    if not candidates:
        raise ValidationError("cannot summarize an empty candidate list")
    if any(c.embedding is None for c in candidates):
        raise ValidationError("diversified summarization needs candidate embeddings")
    ordered = sorted(candidates, key=lambda c: c.position)
    points = np.stack([c.embedding for c in ordered])
    k = choose_num_clusters(points, config)
    assignments = cluster(points, k, config)

    groups: list[list[RankedCandidate]] = [
        [ordered[i] for i in np.flatnonzero(assignments == label)]
        for label in range(k)
    ]
    # Decreasing size; ties broken by the best-ranked member (inverted pyramid).
    groups.sort(key=lambda g: (-len(g), min(c.position for c in g)))

    base = config.budget // k
    budgets = [base + (config.budget - base * k if i == 0 else 0) for i in range(k)]
    segments: list[Segment] = []
    truncated = False
    for group, budget in zip(groups, budgets):
        source, group_truncated = _source_document(group, backend)
        truncated = truncated or group_truncated
        text = backend.generate(source, budget)
        segments.append(
            Segment(
                text=text,
                cluster_size=len(group),
                source_ids=tuple(c.message_id for c in group),
            )
        )
    return Summary(
        segments=tuple(segments),
        full_text="\n".join(s.text for s in segments),
        mode="diversified",
        truncated=truncated,
    )


def summarize(
    candidates: list[RankedCandidate],
    backend: GenerationBackend,
    config: SummaryConfig,
) -> Summary:
    """Dispatch on ``config.mode``."""
    config.validate()
    if config.mode == "diversified":
        return summarize_diversified(candidates, backend, config)
    return summarize_regular(candidates, backend, config)
