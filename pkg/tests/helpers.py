"""Shared fixture builders: stub backends and synthetic corpora."""

from __future__ import annotations

import numpy as np

from crisis_scope.corpus import CategoryId, EventCollection, Message
from crisis_scope.encoder import EncoderBackend, MockEncoder
from crisis_scope.errors import BackendError
from crisis_scope.linguistic import AnnotatorRegistry, RuleAnnotator
from crisis_scope.models import ModelConfig
from crisis_scope.queries import Query

TEST_LANGS = ("aa", "bb", "cc")


class FixedEncoder(EncoderBackend):
    """Maps known texts to preset vectors; anything else is an error."""

    def __init__(self, table: dict[str, np.ndarray], dim: int, name: str = "fixed"):
        self.table = table
        self.dim = dim
        self.name = name

    def encode(self, texts):
        out = np.zeros((len(texts), self.dim))
        for i, text in enumerate(texts):
            if text not in self.table:
                raise BackendError(f"no vector for {text!r}", index=i)
            out[i] = self.table[text]
        return out

    @property
    def identity(self) -> str:
        return f"{self.name}:{self.dim}"


def make_registry(langs=("en",) + TEST_LANGS) -> AnnotatorRegistry:
    registry = AnnotatorRegistry()
    for lang in langs:
        registry.register(lang, RuleAnnotator())
    return registry


def make_message(
    id: str,
    text: str,
    lang: str = "en",
    event_id: str = "ev",
    informative: bool | None = None,
    categories: frozenset[CategoryId] = frozenset(),
) -> Message:
    return Message(
        id=id,
        text=text,
        lang=lang,
        event_id=event_id,
        informative=informative,
        categories=categories,
    )


def tiny_model_config(dim: int, seed: int = 1, epochs: int = 12, **overrides) -> ModelConfig:
    defaults = dict(
        embedding_dim=dim,
        lstm_hidden=16,
        embedding_mlp=(32, 16),
        text_mlp=(16, 8),
        similarity_mlp=(16, 8),
        dropout=0.2,
        batch_size=16,
        learning_rate=0.01,
        epochs=epochs,
        patience=epochs,
        seed=seed,
    )
    defaults.update(overrides)
    return ModelConfig(**defaults)


def separable_messages(
    n: int = 200, dim: int = 1024, seed: int = 7, event_id: str = "synth"
) -> tuple[list[Message], FixedEncoder]:
    """Two well-separated Gaussian blobs keyed by message text."""
    rng = np.random.default_rng(seed)
    table: dict[str, np.ndarray] = {}
    messages: list[Message] = []
    for i in range(n):
        positive = i < n // 2
        text = f"synthmsg{i}"
        vec = rng.normal(0, 0.25, dim)
        vec[0] += 4.0 if positive else -4.0
        table[text] = vec / np.linalg.norm(vec)
        messages.append(
            make_message(f"s{i:03d}", text, event_id=event_id, informative=positive)
        )
    return messages, FixedEncoder(table, dim)


# --- planted cross-lingual retrieval fixture -------------------------------

PLANT_SENTENCES: dict[str, list[str]] = {
    "Weather": [
        "storm winds batter the coast tonight",
        "heavy rain and strong wind hit the region",
        "weather forecast warns of heavy snow",
        "wind gusts reach high speed near the coast",
        "rain keeps falling across the region",
    ],
    "Casualties": [
        "rescue teams report many injured people",
        "several victims taken to the hospital",
        "the quake left dozens injured in town",
        "two people missing after the collapse",
        "emergency crews count the casualties",
    ],
    "Water": [
        "the river overflows and floods the streets",
        "flash floods submerge the old town",
        "water levels keep rising near the river",
        "flooding blocks every road to the port",
        "heavy floods damage homes by the river",
    ],
}

QUERY_KEYWORDS: dict[str, list[str]] = {
    "Weather": ["storm", "wind", "rain", "snow", "forecast"],
    "Casualties": ["injured", "victims", "casualties", "missing", "rescue"],
    "Water": ["flood", "river", "water", "overflow", "submerged"],
}

QUERY_TEMPLATES: dict[str, list[str]] = {
    "Weather": ["heavy rain", "strong wind", "weather forecast"],
    "Casualties": ["many injured people", "people missing", "taken to hospital"],
    "Water": ["river overflows", "flash floods", "water levels rising"],
}


def _vocabulary() -> set[str]:
    words: set[str] = set()
    for sentences in PLANT_SENTENCES.values():
        for sentence in sentences:
            words.update(sentence.split())
    for items in list(QUERY_KEYWORDS.values()) + list(QUERY_TEMPLATES.values()):
        for item in items:
            words.update(item.split())
    return words


def build_alias_table() -> dict[str, str]:
    """Pseudo-translation: bb/cc words are canonical words with a prefix."""
    alias: dict[str, str] = {}
    for word in _vocabulary():
        alias[f"b{word}"] = word
        alias[f"c{word}"] = word
    return alias


def translate(text: str, lang: str) -> str:
    if lang == "aa":
        return text
    prefix = {"bb": "b", "cc": "c"}[lang]
    return " ".join(prefix + w for w in text.split())


def planted_queries() -> dict[str, Query]:
    return {
        name: Query(
            category=CategoryId.from_name(name),
            keywords=tuple(QUERY_KEYWORDS[name]),
            templates=tuple(QUERY_TEMPLATES[name]),
            prototypes=tuple(PLANT_SENTENCES[name]),
        )
        for name in PLANT_SENTENCES
    }


def _filler_text(rng: np.random.Generator, n_words: int = 8) -> str:
    return " ".join(f"zq{rng.integers(0, 5000)}" for _ in range(n_words))


def planted_training_corpus(
    seed: int = 5, per_category: int = 12, fillers: int = 36
) -> EventCollection:
    """Category-labeled variants of the planted sentences plus filler noise."""
    rng = np.random.default_rng(seed)
    messages: list[Message] = []
    counter = 0
    for name, sentences in PLANT_SENTENCES.items():
        category = frozenset({CategoryId.from_name(name)})
        for j in range(per_category):
            base = sentences[j % len(sentences)].split()
            rng.shuffle(base)
            lang = TEST_LANGS[j % len(TEST_LANGS)]
            text = translate(" ".join(base), lang)
            messages.append(
                make_message(
                    f"tr{counter:03d}",
                    text,
                    lang=lang,
                    event_id="stormtrain",
                    informative=True,
                    categories=category,
                )
            )
            counter += 1
    for j in range(fillers):
        lang = TEST_LANGS[j % len(TEST_LANGS)]
        messages.append(
            make_message(
                f"tr{counter:03d}",
                _filler_text(rng),
                lang=lang,
                event_id="stormtrain",
                informative=True,
            )
        )
        counter += 1
    return EventCollection(event_id="stormtrain", name="stormtrain", messages=tuple(messages))


def planted_test_corpus(
    seed: int = 9, total: int = 150
) -> tuple[EventCollection, dict[str, list[str]], list[tuple[str, str]]]:
    """150-message candidate pool: 5 planted per category, dup pairs, fillers.

    Returns the collection, planted ids per category, and the duplicate
    pairs (exact and near) expected to collapse to one survivor each.
    """
    rng = np.random.default_rng(seed)
    messages: list[Message] = []
    planted: dict[str, list[str]] = {name: [] for name in PLANT_SENTENCES}
    counter = 0

    def _next_id() -> str:
        nonlocal counter
        counter += 1
        return f"te{counter:03d}"

    for name, sentences in PLANT_SENTENCES.items():
        category = frozenset({CategoryId.from_name(name)})
        for j, sentence in enumerate(sentences):
            lang = TEST_LANGS[j % len(TEST_LANGS)]
            mid = _next_id()
            planted[name].append(mid)
            messages.append(
                make_message(
                    mid,
                    translate(sentence, lang),
                    lang=lang,
                    event_id="stormtest",
                    informative=True,
                    categories=category,
                )
            )

    dup_pairs: list[tuple[str, str]] = []
    # Exact pair after normalization: same words, different URLs.
    base = _filler_text(rng)
    a, b = _next_id(), _next_id()
    messages.append(
        make_message(a, f"{base} https://t.co/one1", lang="aa", event_id="stormtest", informative=True)
    )
    messages.append(
        make_message(b, f"{base} https://t.co/two2", lang="bb", event_id="stormtest", informative=True)
    )
    dup_pairs.append((a, b))
    # Exact pair: verbatim copies.
    copy_text = _filler_text(rng)
    a, b = _next_id(), _next_id()
    messages.append(make_message(a, copy_text, lang="aa", event_id="stormtest", informative=True))
    messages.append(make_message(b, copy_text, lang="aa", event_id="stormtest", informative=True))
    dup_pairs.append((a, b))
    # Near pair: trailing punctuation only.
    near_text = _filler_text(rng, n_words=14)
    a, b = _next_id(), _next_id()
    messages.append(make_message(a, near_text, lang="cc", event_id="stormtest", informative=True))
    messages.append(make_message(b, near_text + " !", lang="cc", event_id="stormtest", informative=True))
    dup_pairs.append((a, b))

    while len(messages) < total:
        lang = TEST_LANGS[len(messages) % len(TEST_LANGS)]
        messages.append(
            make_message(
                _next_id(), _filler_text(rng), lang=lang, event_id="stormtest", informative=True
            )
        )
    collection = EventCollection(
        event_id="stormtest", name="stormtest", messages=tuple(messages)
    )
    return collection, planted, dup_pairs


def planted_encoder(dim: int = 64, seed: int = 3) -> MockEncoder:
    return MockEncoder(dim=dim, seed=seed, alias=build_alias_table())
