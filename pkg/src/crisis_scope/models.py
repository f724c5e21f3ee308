"""Informative-message classifier and query-conditioned relevance ranker.

Both share one fusion architecture: a recurrent layer consumes the message's
sentence-embedding sequence and feeds a sigmoid MLP (widths 1024;256;128,
dropout 0.5); the 15 scaled text features go through a relu MLP (128;24); the
ranker adds a third relu MLP (128;24) over the 6 query-similarity features.
Branch outputs are concatenated into a softmax layer over two classes,
trained with Adam (lr 0.001, batch size 100) on binary cross-entropy.

Training is single-threaded per model instance and fully seeded; trained
models are immutable and safe for concurrent inference.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
import torch
import torch.nn.functional as F
from torch import nn

from .corpus import Message, normalize
from .encoder import EncoderBackend, message_embedding, sentence_sequence
from .errors import IntegrityError, ValidationError
from .linguistic import (
    AnnotatorRegistry,
    FeatureScaler,
    annotate,
    apply_scaler,
    extract_features,
)
from .queries import Query, QueryEmbeddings, SimilarityFeatures, embed_query, similarity_features

N_TEXT_FEATURES = 15
N_SIMILARITY_FEATURES = 6


@dataclass
class ModelConfig:
    """Architecture and training hyperparameters (defaults match the shipped setup)."""

    embedding_dim: int = 1024
    lstm_hidden: int = 1024
    embedding_mlp: tuple[int, ...] = (1024, 256, 128)
    text_mlp: tuple[int, ...] = (128, 24)
    similarity_mlp: tuple[int, ...] = (128, 24)
    dropout: float = 0.5
    learning_rate: float = 0.001
    batch_size: int = 100
    epochs: int = 10
    patience: int = 3
    seed: int = 0

    def validate(self) -> None:
        for name in ("embedding_dim", "lstm_hidden", "batch_size", "epochs"):
            if getattr(self, name) < 1:
                raise ValidationError(f"model config: {name} must be >= 1")
        for name in ("embedding_mlp", "text_mlp", "similarity_mlp"):
            widths = getattr(self, name)
            if not widths or any(w < 1 for w in widths):
                raise ValidationError(f"model config: {name} widths must be positive")
        if not 0.0 <= self.dropout < 1.0:
            raise ValidationError("model config: dropout must be in [0, 1)")
        if self.learning_rate <= 0:
            raise ValidationError("model config: learning rate must be positive")
        if self.patience < 0:
            raise ValidationError("model config: patience must be >= 0")


@dataclass
class TrainingHistory:
    train_loss: list[float] = field(default_factory=list)
    val_loss: list[float] = field(default_factory=list)
    stopped_early: bool = False


class Featurizer:
    """Bundles the annotators, encoder and fitted scaler used by a model.

    Caches per-text annotations and embeddings; everything here is
    deterministic, so caching never changes results.
    """

    def __init__(
        self,
        annotators: AnnotatorRegistry,
        backend: EncoderBackend,
        scaler: FeatureScaler,
    ):
        self.annotators = annotators
        self.backend = backend
        self.scaler = scaler
        self._seq_cache: dict[str, np.ndarray] = {}
        self._emb_cache: dict[str, np.ndarray] = {}
        self._feat_cache: dict[tuple[str, str], np.ndarray] = {}

    def sequence(self, message: Message) -> np.ndarray:
        key = message.text
        if key not in self._seq_cache:
            self._seq_cache[key] = sentence_sequence(message, self.backend)
        return self._seq_cache[key]

    def embedding(self, message: Message) -> np.ndarray:
        key = message.text
        if key not in self._emb_cache:
            self._emb_cache[key] = message_embedding(message, self.backend)
        return self._emb_cache[key]

    def features(self, message: Message) -> np.ndarray:
        key = (message.lang, message.text)
        if key not in self._feat_cache:
            raw = extract_features(annotate(message, self.annotators), message)
            self._feat_cache[key] = apply_scaler(self.scaler, raw)
        return self._feat_cache[key]

    def similarity(self, message: Message, qe: QueryEmbeddings) -> SimilarityFeatures:
        return similarity_features(self.embedding(message), qe)


def fit_featurizer(
    annotators: AnnotatorRegistry,
    backend: EncoderBackend,
    train: Sequence[Message],
) -> Featurizer:
    """Fit the min-max scaler on the training messages and bundle the parts."""
    raw = [extract_features(annotate(m, annotators), m) for m in train]
    from .linguistic import fit_scaler

    return Featurizer(annotators, backend, fit_scaler(raw))


def _mlp(in_dim: int, widths: tuple[int, ...], activation: str, dropout: float) -> nn.Sequential:
    layers: list[nn.Module] = []
    prev = in_dim
    for width in widths:
        layers.append(nn.Linear(prev, width))
        layers.append(nn.Sigmoid() if activation == "sigmoid" else nn.ReLU())
        if dropout > 0:
            layers.append(nn.Dropout(dropout))
        prev = width
    return nn.Sequential(*layers)


class FusionModel(nn.Module):
    """Sentence-sequence LSTM plus feature MLPs fused into a 2-class softmax."""

    def __init__(self, config: ModelConfig, with_similarity: bool):
        super().__init__()
        self.config = config
        self.with_similarity = with_similarity
        self.lstm = nn.LSTM(
            config.embedding_dim, config.lstm_hidden, num_layers=1, batch_first=True
        )
        self.embedding_branch = _mlp(
            config.lstm_hidden, config.embedding_mlp, "sigmoid", config.dropout
        )
        self.text_branch = _mlp(N_TEXT_FEATURES, config.text_mlp, "relu", 0.0)
        fused = config.embedding_mlp[-1] + config.text_mlp[-1]
        if with_similarity:
            self.similarity_branch = _mlp(
                N_SIMILARITY_FEATURES, config.similarity_mlp, "relu", 0.0
            )
            fused += config.similarity_mlp[-1]
        self.fusion = nn.Linear(fused, 2)

    @property
    def branch_widths(self) -> dict[str, tuple[int, ...] | None]:
        return {
            "embedding": tuple(self.config.embedding_mlp),
            "text": tuple(self.config.text_mlp),
            "similarity": tuple(self.config.similarity_mlp) if self.with_similarity else None,
        }

    def forward(
        self,
        sequences: torch.Tensor,
        lengths: torch.Tensor,
        features: torch.Tensor,
        similarities: torch.Tensor | None = None,
        return_logits: bool = False,
    ) -> torch.Tensor:
        if self.with_similarity and similarities is None:
            raise ValidationError("model was built with a similarity branch; 6-vector required")
        if not self.with_similarity and similarities is not None:
            raise ValidationError("model was built without a similarity branch; got a 6-vector")
        packed = nn.utils.rnn.pack_padded_sequence(
            sequences, lengths.cpu(), batch_first=True, enforce_sorted=False
        )
        _, (hidden, _) = self.lstm(packed)
        parts = [self.embedding_branch(hidden[-1]), self.text_branch(features)]
        if self.with_similarity:
            parts.append(self.similarity_branch(similarities))
        logits = self.fusion(torch.cat(parts, dim=1))
        return logits if return_logits else torch.softmax(logits, dim=1)


def build_model(config: ModelConfig, with_similarity_branch: bool = False) -> FusionModel:
    """Construct an untrained fusion model with seeded initialization."""
    config.validate()
    torch.manual_seed(config.seed)
    return FusionModel(config, with_similarity_branch)


@dataclass
class TrainedClassifier:
    """A fitted model bound to its featurizer and encoder identity."""

    model: FusionModel
    config: ModelConfig
    featurizer: Featurizer
    backend_identity: str
    history: TrainingHistory
    query: Query | None = None

    @property
    def with_similarity(self) -> bool:
        return self.model.with_similarity

    def check_backend(self) -> None:
        if self.featurizer.backend.identity != self.backend_identity:
            raise IntegrityError(
                f"model was trained with encoder {self.backend_identity!r}, "
                f"got {self.featurizer.backend.identity!r}"
            )


TrainedRanker = TrainedClassifier


def _batch_tensors(
    featurizer: Featurizer,
    messages: Sequence[Message],
    qe: QueryEmbeddings | None,
) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor, torch.Tensor | None]:
    sequences = [torch.as_tensor(featurizer.sequence(m), dtype=torch.float32) for m in messages]
    lengths = torch.tensor([s.shape[0] for s in sequences], dtype=torch.int64)
    padded = nn.utils.rnn.pad_sequence(sequences, batch_first=True)
    feats = torch.as_tensor(
        np.stack([featurizer.features(m) for m in messages]), dtype=torch.float32
    )
    sims = None
    if qe is not None:
        sims = torch.as_tensor(
            np.stack([featurizer.similarity(m, qe).as_array() for m in messages]),
            dtype=torch.float32,
        )
    return padded, lengths, feats, sims


def _forward_scores(
    trained: TrainedClassifier,
    messages: Sequence[Message],
    qe: QueryEmbeddings | None,
) -> np.ndarray:
    trained.check_backend()
    if trained.with_similarity and qe is None:
        qe = embed_query(trained.query, trained.featurizer.backend)
    trained.model.eval()
    with torch.no_grad():
        padded, lengths, feats, sims = _batch_tensors(trained.featurizer, messages, qe)
        probs = trained.model(padded, lengths, feats, sims)
    return probs[:, 1].numpy()


def _fit(
    model: FusionModel,
    featurizer: Featurizer,
    messages: list[Message],
    labels: np.ndarray,
    config: ModelConfig,
    qe: QueryEmbeddings | None,
) -> TrainingHistory:
    if model.config.embedding_dim != featurizer.backend.dim:
        raise ValidationError(
            f"model expects {model.config.embedding_dim}-dim embeddings, "
            f"encoder produces {featurizer.backend.dim}"
        )
    rng = np.random.default_rng(config.seed)
    torch.manual_seed(config.seed + 1)

    order = rng.permutation(len(messages))
    n_val = len(messages) // 10 if len(messages) >= 10 else 0
    val_idx, train_idx = order[:n_val], order[n_val:]

    padded, lengths, feats, sims = _batch_tensors(featurizer, messages, qe)
    targets = torch.as_tensor(labels, dtype=torch.float32)
    optimizer = torch.optim.Adam(model.parameters(), lr=config.learning_rate)
    history = TrainingHistory()
    best_val = float("inf")
    stale = 0

    def _loss_on(idx: np.ndarray) -> torch.Tensor:
        sel = torch.as_tensor(idx, dtype=torch.int64)
        probs = model(
            padded[sel],
            lengths[sel],
            feats[sel],
            sims[sel] if sims is not None else None,
        )
        positive = probs[:, 1].clamp(1e-7, 1.0 - 1e-7)
        return F.binary_cross_entropy(positive, targets[sel])

    for _epoch in range(config.epochs):
        model.train()
        shuffled = rng.permutation(train_idx)
        epoch_loss = 0.0
        for start in range(0, len(shuffled), config.batch_size):
            batch = shuffled[start : start + config.batch_size]
            optimizer.zero_grad()
            loss = _loss_on(batch)
            loss.backward()
            optimizer.step()
            epoch_loss += float(loss.detach()) * len(batch)
        history.train_loss.append(epoch_loss / len(shuffled))

        if n_val:
            model.eval()
            with torch.no_grad():
                val_loss = float(_loss_on(val_idx))
            history.val_loss.append(val_loss)
            if val_loss < best_val:
                best_val = val_loss
                stale = 0
            else:
                stale += 1
                if stale >= config.patience > 0:
                    history.stopped_early = True
                    break
    model.eval()
    return history


def train_classifier(
    model: FusionModel,
    train: Sequence[Message],
    featurizer: Featurizer,
    config: ModelConfig,
) -> TrainedClassifier:
    """Fit the informative-message classifier on labeled messages."""
    if model.with_similarity:
        raise ValidationError("classifier must be built without the similarity branch")
    labeled = [m for m in train if m.informative is not None]
    if not labeled:
        raise ValidationError("no labeled messages in the training set")
    labels = np.array([1.0 if m.informative else 0.0 for m in labeled])
    if labels.min() == labels.max():
        raise ValidationError("training set must contain both classes")
    history = _fit(model, featurizer, labeled, labels, config, qe=None)
    return TrainedClassifier(
        model=model,
        config=config,
        featurizer=featurizer,
        backend_identity=featurizer.backend.identity,
        history=history,
    )


def train_ranker(
    model: FusionModel,
    train: Sequence[Message],
    query: Query,
    featurizer: Featurizer,
    config: ModelConfig,
) -> TrainedRanker:
    """Fit a per-category ranker: category-labeled positives vs informative rest."""
    if query is None:
        raise ValidationError("ranker training requires a query")
    if not model.with_similarity:
        raise ValidationError("ranker must be built with the similarity branch")
    positives = [m for m in train if query.category in m.categories]
    negatives = [
        m for m in train if m.informative and query.category not in m.categories
    ]
    if not positives or not negatives:
        raise ValidationError(
            f"category {query.category.value!r}: need both positive and negative examples "
            f"(got {len(positives)} / {len(negatives)})"
        )
    messages = positives + negatives
    labels = np.array([1.0] * len(positives) + [0.0] * len(negatives))
    qe = embed_query(query, featurizer.backend)
    history = _fit(model, featurizer, messages, labels, config, qe=qe)
    return TrainedRanker(
        model=model,
        config=config,
        featurizer=featurizer,
        backend_identity=featurizer.backend.identity,
        history=history,
        query=query,
    )


def predict_informative(clf: TrainedClassifier, message: Message) -> float:
    """Probability that the message is crisis-relevant (label = score > 0.5)."""
    return float(_forward_scores(clf, [message], qe=None)[0])


def predict_scores(
    trained: TrainedClassifier, messages: Sequence[Message]
) -> np.ndarray:
    """Batch positive-class probabilities."""
    if not messages:
        return np.zeros(0)
    return _forward_scores(trained, messages, qe=None)


@dataclass(frozen=True)
class RankedCandidate:
    """One retrieval result with score and feature provenance."""

    message_id: str
    text: str
    lang: str
    score: float
    features: SimilarityFeatures
    position: int
    embedding: np.ndarray | None = field(default=None, compare=False, repr=False)


def rank(
    candidates: Sequence[Message],
    query: Query,
    ranker: TrainedRanker,
    k: int = 100,
    near_dup_threshold: float = 0.95,
) -> list[RankedCandidate]:
    """Score, dedup and return the top-k candidates for a query.

    Candidates must already be filtered to informative messages. Exact
    duplicates (by normalized text) and near duplicates (embedding cosine at
    or above the threshold) are dropped keeping the higher-scored instance.
    """
    if k < 1:
        raise ValidationError("k must be >= 1")
    if not candidates:
        return []
    qe = embed_query(query, ranker.featurizer.backend)
    scores = _forward_scores(ranker, candidates, qe)
    embeddings = np.stack([ranker.featurizer.embedding(m) for m in candidates])
    norms = np.linalg.norm(embeddings, axis=1, keepdims=True)
    unit = embeddings / np.where(norms > 0, norms, 1.0)
    feats = [ranker.featurizer.similarity(m, qe) for m in candidates]
    texts = [normalize(m.text) for m in candidates]

    order = sorted(
        range(len(candidates)),
        key=lambda i: (-scores[i], -feats[i].kw_max, candidates[i].id),
    )
    kept: list[int] = []
    seen_texts: set[str] = set()
    for i in order:
        if texts[i] in seen_texts:
            continue
        if kept and np.any(unit[kept] @ unit[i] >= near_dup_threshold):
            continue
        kept.append(i)
        seen_texts.add(texts[i])

    return [
        RankedCandidate(
            message_id=candidates[i].id,
            text=texts[i],
            lang=candidates[i].lang,
            score=float(scores[i]),
            features=feats[i],
            position=position,
            embedding=embeddings[i],
        )
        for position, i in enumerate(kept[:k])
    ]


def save_checkpoint(trained: TrainedClassifier, path: str | Path) -> None:
    """Serialize the model with its config, scaler, encoder identity and seed."""
    from .queries import query_to_record

    payload = {
        "state_dict": trained.model.state_dict(),
        "config": asdict(trained.config),
        "with_similarity": trained.with_similarity,
        "backend_identity": trained.backend_identity,
        "scaler": {
            "mins": list(trained.featurizer.scaler.mins),
            "maxs": list(trained.featurizer.scaler.maxs),
        },
        "seed": trained.config.seed,
        "query": query_to_record(trained.query) if trained.query else None,
        "history": {
            "train_loss": trained.history.train_loss,
            "val_loss": trained.history.val_loss,
            "stopped_early": trained.history.stopped_early,
        },
    }
    torch.save(payload, Path(path))


def load_checkpoint(
    path: str | Path,
    annotators: AnnotatorRegistry,
    backend: EncoderBackend,
) -> TrainedClassifier:
    """Load a checkpoint, refusing to run under a different encoder identity."""
    from .corpus import CategoryId

    payload = torch.load(Path(path), weights_only=False)
    stored_identity = payload["backend_identity"]
    if backend.identity != stored_identity:
        raise IntegrityError(
            f"checkpoint was trained with encoder {stored_identity!r}, "
            f"current encoder is {backend.identity!r}"
        )
    config_dict = dict(payload["config"])
    for key in ("embedding_mlp", "text_mlp", "similarity_mlp"):
        config_dict[key] = tuple(config_dict[key])
    config = ModelConfig(**config_dict)
    model = FusionModel(config, payload["with_similarity"])
    model.load_state_dict(payload["state_dict"])
    model.eval()
    scaler = FeatureScaler(
        mins=tuple(payload["scaler"]["mins"]), maxs=tuple(payload["scaler"]["maxs"])
    )
    query = None
    if payload["query"] is not None:
        record = payload["query"]
        query = Query(
            category=CategoryId.from_name(record["category"]),
            keywords=tuple(record["keywords"]),
            templates=tuple(record["templates"]),
            prototypes=tuple(record["prototypes"]),
        )
    history = TrainingHistory(**payload["history"])
    return TrainedClassifier(
        model=model,
        config=config,
        featurizer=Featurizer(annotators, backend, scaler),
        backend_identity=stored_identity,
        history=history,
        query=query,
    )
