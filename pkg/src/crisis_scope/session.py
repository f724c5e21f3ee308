"""Shared pipeline state for the CLI and the HTTP service.

A session holds loaded collections, saved queries and lazily trained
per-category rankers. Query upserts and ranker training are serialized
behind a lock; everything else is immutable after load, so concurrent
readers are safe. Rankers are cached per query id and invalidated when the
query changes, which keeps identical requests bit-identical.
"""

from __future__ import annotations

import threading
from pathlib import Path

from .config import PipelineConfig
from .corpus import EventCollection, Message, load_messages
from .errors import ValidationError
from .models import (
    RankedCandidate,
    TrainedRanker,
    build_model,
    fit_featurizer,
    rank,
    train_ranker,
)
from .queries import Query, parse_query
from .summarize import Summary, SummaryConfig, summarize_diversified, summarize_regular


class Session:
    """Loaded data plus model/query caches for one pipeline configuration."""

    def __init__(self, config: PipelineConfig):
        self.config = config
        self.encoder = config.build_encoder()
        self.generator = config.build_generator()
        self.annotators = config.build_annotators()
        self.collections: dict[str, EventCollection] = {}
        self.queries: dict[str, Query] = {}
        self._rankers: dict[str, TrainedRanker] = {}
        self._lock = threading.Lock()
        self._query_counter = 0

    @classmethod
    def from_config(cls, config: PipelineConfig) -> "Session":
        session = cls(config)
        for path in config.data.messages:
            session.add_collection(load_messages(path))
        if config.data.queries_dir:
            for path in sorted(Path(config.data.queries_dir).glob("*.json")):
                session.upsert_query(parse_query(path), query_id=path.stem)
        return session

    def add_collection(self, collection: EventCollection) -> None:
        if collection.event_id in self.collections:
            raise ValidationError(f"event {collection.event_id!r} already loaded")
        self.collections[collection.event_id] = collection

    def get_collection(self, event_id: str) -> EventCollection:
        try:
            return self.collections[event_id]
        except KeyError:
            raise ValidationError(f"unknown event {event_id!r}") from None

    def upsert_query(self, query: Query, query_id: str | None = None) -> str:
        """Create or update a saved query; invalidates the cached ranker."""
        with self._lock:
            if query_id is None:
                self._query_counter += 1
                query_id = f"q{self._query_counter}"
            self.queries[query_id] = query
            self._rankers.pop(query_id, None)
        return query_id

    def get_query(self, query_id: str) -> Query:
        try:
            return self.queries[query_id]
        except KeyError:
            raise ValidationError(f"unknown query {query_id!r}") from None

    def _labeled_messages(self) -> list[Message]:
        return [
            m
            for coll in self.collections.values()
            for m in coll.messages
            if m.informative is not None
        ]

    def get_ranker(self, query_id: str) -> TrainedRanker:
        """Return the cached ranker for a query, training it on first use."""
        query = self.get_query(query_id)
        with self._lock:
            cached = self._rankers.get(query_id)
            if cached is not None:
                return cached
            train = self._labeled_messages()
            if not train:
                raise ValidationError("no labeled messages loaded; cannot train a ranker")
            featurizer = fit_featurizer(self.annotators, self.encoder, train)
            model = build_model(self.config.model, with_similarity_branch=True)
            ranker = train_ranker(model, train, query, featurizer, self.config.model)
            self._rankers[query_id] = ranker
            return ranker

    def candidates(self, event_id: str) -> list[Message]:
        """Informative messages of one event (the ranking candidate pool)."""
        collection = self.get_collection(event_id)
        return [m for m in collection.messages if m.informative]

    def rank(self, query_id: str, event_id: str, k: int | None = None) -> list[RankedCandidate]:
        ranker = self.get_ranker(query_id)
        pool = self.candidates(event_id)
        return rank(pool, self.get_query(query_id), ranker, k=k or self.config.k)

    def summarize(
        self,
        query_id: str,
        event_id: str,
        mode: str,
        budget: int | None = None,
    ) -> Summary:
        candidates = self.rank(query_id, event_id)
        if not candidates:
            raise ValidationError(f"no informative candidates for event {event_id!r}")
        base = self.config.summary
        config = SummaryConfig(
            mode=mode,
            budget=budget or base.budget,
            k_max=base.k_max,
            seed=base.seed,
            restarts=base.restarts,
            min_cluster_candidates=base.min_cluster_candidates,
        )
        config.validate()
        if mode == "diversified":
            return summarize_diversified(candidates, self.generator, config)
        return summarize_regular(candidates, self.generator, config)

    def meta(self) -> dict:
        """Reproducibility stamp carried by every output."""
        return {
            "seed": self.config.seed,
            "encoder": self.encoder.identity,
            "generator": self.generator.name,
        }
