"""Linguistic annotation backends and the 15 message-level features.

Feature layout (fixed, part of the public contract):

    0  numeral count          8  modality-marker count (modal auxiliaries)
    1  noun count             9  has PERSON entity (binary)
    2  verb count            10  has PLACE entity (binary)
    3  adverb count          11  has ORG entity (binary)
    4  adjective count       12  has DATE entity (binary)
    5  subject-noun count    13  URL count (raw text)
    6  compound count        14  mention count (raw text)
    7  root count (one per sentence)

Counts 0-8, 13, 14 are min-max scaled against a training corpus; the binary
entity indicators pass through unscaled. Annotation backends are registered
per language; the built-in rule backend is a deterministic dictionary tagger
meant for fixtures and desk-scale runs, with real taggers pluggable behind
the same contract.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace

import numpy as np

from .corpus import MENTION_RE, URL_RE, Message, normalize, split_sentences
from .errors import UnsupportedLanguageError, ValidationError

N_FEATURES = 15

FEATURE_NAMES = (
    "numerals",
    "nouns",
    "verbs",
    "adverbs",
    "adjectives",
    "subject_nouns",
    "compounds",
    "roots",
    "modality",
    "has_person",
    "has_place",
    "has_org",
    "has_date",
    "urls",
    "mentions",
)

#: indices rescaled by the corpus-fitted scaler; 9-12 are binary pass-through
SCALED_INDICES = (0, 1, 2, 3, 4, 5, 6, 7, 8, 13, 14)
BINARY_INDICES = (9, 10, 11, 12)

ENTITY_CLASSES = ("PERSON", "PLACE", "ORG", "DATE")


@dataclass(frozen=True)
class Annotation:
    """POS, dependency and entity annotation for one message.

    ``tokens`` holds (surface, pos) pairs over the whole message;
    ``dependencies`` holds (head index, dependent index, relation) with
    head -1 for sentence roots; ``entities`` holds ((start, end), class)
    token spans, end exclusive.
    """

    tokens: tuple[tuple[str, str], ...]
    dependencies: tuple[tuple[int, int, str], ...]
    entities: tuple[tuple[tuple[int, int], str], ...]

    def __post_init__(self):
        n = len(self.tokens)
        for head, dep, _rel in self.dependencies:
            if dep < 0 or dep >= n or head < -1 or head >= n:
                raise ValidationError(f"dependency index out of range for {n} tokens")
        for (start, end), cls in self.entities:
            if start < 0 or end > n or start >= end:
                raise ValidationError("entity span out of token range")
            if cls not in ENTITY_CLASSES:
                raise ValidationError(f"unknown entity class {cls!r}")


@dataclass(frozen=True)
class Lexicon:
    """Word lists driving the deterministic rule annotator."""

    nouns: frozenset[str] = frozenset()
    verbs: frozenset[str] = frozenset()
    adverbs: frozenset[str] = frozenset()
    adjectives: frozenset[str] = frozenset()
    modals: frozenset[str] = frozenset()
    persons: frozenset[str] = frozenset()
    places: frozenset[str] = frozenset()
    orgs: frozenset[str] = frozenset()
    dates: frozenset[str] = frozenset()

    def merged(self, other: "Lexicon") -> "Lexicon":
        return Lexicon(
            **{
                name: getattr(self, name) | getattr(other, name)
                for name in self.__dataclass_fields__
            }
        )


# Word classes are kept disjoint so tagging is unambiguous.
DEFAULT_LEXICON = Lexicon(
    nouns=frozenset(
        """
        authorities bridge building buildings casualties center city coast
        damage danger earthquake eruption evacuation fire firefighters flood
        floods forecast home homes hospital injured people power rain
        rainfall residents river roads shelter snow storm supplies trees
        volcano warning water weather wind winds
        """.split()
    ),
    verbs=frozenset(
        """
        affect batter battered burn collapse collapsed destroy destroyed
        evacuate evacuated flooded help hit injure killed provide provides
        report reported rescue rescued stay strike struck warn warned
        """.split()
    ),
    adverbs=frozenset("quickly severely heavily urgently currently".split()),
    adjectives=frozenset(
        "heavy strong severe dangerous major massive terrible safe red".split()
    ),
    modals=frozenset("can could may might must shall should will would".split()),
    persons=frozenset(),
    places=frozenset("barcelona catalonia zagreb taal manila fukushima".split()),
    orgs=frozenset("ercc redcross unicef".split()),
    dates=frozenset(
        """
        monday tuesday wednesday thursday friday saturday sunday january
        february march april june july august september october november
        december today tonight yesterday tomorrow
        """.split()
    ),
)

_NUMERAL_RE = re.compile(r"^\d+(?:[.,]\d+)*$")
_TOKEN_RE = re.compile(r"\w+|[^\w\s]", re.UNICODE)


class RuleAnnotator:
    """Deterministic dictionary-based annotator for fixtures and tests.

    Tagging: numerals by pattern, open classes by lexicon lookup, modal
    auxiliaries as AUX, everything else X. Dependencies per sentence: the
    first verb (else the first token) is the root; the nearest preceding
    noun is its nsubj; adjacent noun pairs form compound relations; modal
    auxiliaries attach to the root as aux.
    """

    name = "rule"
    concurrent_safe = True

    def __init__(self, lexicon: Lexicon | None = None):
        self.lexicon = lexicon or DEFAULT_LEXICON

    def _pos(self, token: str) -> str:
        if _NUMERAL_RE.match(token):
            return "NUM"
        lower = token.lower()
        lex = self.lexicon
        if lower in lex.modals:
            return "AUX"
        if lower in lex.nouns:
            return "NOUN"
        if lower in lex.verbs:
            return "VERB"
        if lower in lex.adverbs:
            return "ADV"
        if lower in lex.adjectives:
            return "ADJ"
        if not token[0].isalnum():
            return "PUNCT"
        return "X"

    def annotate(self, text: str, lang: str) -> Annotation:
        tokens: list[tuple[str, str]] = []
        dependencies: list[tuple[int, int, str]] = []
        entities: list[tuple[tuple[int, int], str]] = []
        offset = 0
        for sentence in split_sentences(text):
            sent_tokens = _TOKEN_RE.findall(sentence)
            tagged = [(tok, self._pos(tok)) for tok in sent_tokens]
            tokens.extend(tagged)
            if not tagged:
                continue
            word_idx = [
                offset + i for i, (_, pos) in enumerate(tagged) if pos != "PUNCT"
            ]
            root = next(
                (i for i in word_idx if tokens[i][1] == "VERB"),
                word_idx[0] if word_idx else offset,
            )
            dependencies.append((-1, root, "root"))
            subject = next(
                (i for i in reversed(word_idx) if i < root and tokens[i][1] == "NOUN"),
                None,
            )
            if subject is not None:
                dependencies.append((root, subject, "nsubj"))
            for left, right in zip(word_idx, word_idx[1:]):
                if (
                    right == left + 1
                    and tokens[left][1] == "NOUN"
                    and tokens[right][1] == "NOUN"
                ):
                    dependencies.append((right, left, "compound"))
            for i in word_idx:
                if tokens[i][1] == "AUX":
                    dependencies.append((root, i, "aux"))
            offset += len(tagged)

        lex = self.lexicon
        entity_sets = (
            (lex.persons, "PERSON"),
            (lex.places, "PLACE"),
            (lex.orgs, "ORG"),
            (lex.dates, "DATE"),
        )
        for i, (surface, _pos) in enumerate(tokens):
            lower = surface.lower()
            for vocabulary, cls in entity_sets:
                if lower in vocabulary:
                    entities.append(((i, i + 1), cls))
        return Annotation(
            tokens=tuple(tokens),
            dependencies=tuple(dependencies),
            entities=tuple(entities),
        )


class AnnotatorRegistry:
    """Maps language codes to annotation backends."""

    def __init__(self, backends: dict[str, RuleAnnotator] | None = None):
        self._backends = dict(backends or {})

    def register(self, lang: str, backend) -> None:
        self._backends[lang] = backend

    def get(self, lang: str):
        try:
            return self._backends[lang]
        except KeyError:
            raise UnsupportedLanguageError(lang, tuple(self._backends)) from None

    @property
    def languages(self) -> tuple[str, ...]:
        return tuple(sorted(self._backends))


def annotate(message: Message, registry: AnnotatorRegistry) -> Annotation:
    """Annotate a message with the backend registered for its language."""
    backend = registry.get(message.lang)
    text = normalize(message.text)
    if not text:
        raise ValidationError(
            f"message {message.id!r} is empty after normalization; nothing to annotate"
        )
    return backend.annotate(text, message.lang)


def extract_features(annotation: Annotation, message: Message) -> np.ndarray:
    """The 15-feature vector; URL/mention counts use the raw (pre-norm) text."""
    pos_counts = {"NUM": 0, "NOUN": 0, "VERB": 0, "ADV": 0, "ADJ": 0, "AUX": 0}
    for _surface, pos in annotation.tokens:
        if pos in pos_counts:
            pos_counts[pos] += 1
    rel_counts = {"nsubj": 0, "compound": 0, "root": 0}
    for _head, _dep, rel in annotation.dependencies:
        key = "nsubj" if rel in ("nsubj", "nsubj:pass") else rel
        if key in rel_counts:
            rel_counts[key] += 1
    entity_classes = {cls for _span, cls in annotation.entities}

    features = np.zeros(N_FEATURES)
    features[0] = pos_counts["NUM"]
    features[1] = pos_counts["NOUN"]
    features[2] = pos_counts["VERB"]
    features[3] = pos_counts["ADV"]
    features[4] = pos_counts["ADJ"]
    features[5] = rel_counts["nsubj"]
    features[6] = rel_counts["compound"]
    features[7] = rel_counts["root"]
    features[8] = pos_counts["AUX"]
    features[9] = float("PERSON" in entity_classes)
    features[10] = float("PLACE" in entity_classes)
    features[11] = float("ORG" in entity_classes)
    features[12] = float("DATE" in entity_classes)
    features[13] = len(URL_RE.findall(message.text))
    features[14] = len(MENTION_RE.findall(message.text))
    return features


@dataclass(frozen=True)
class FeatureScaler:
    """Per-index min/max fitted on a training corpus."""

    mins: tuple[float, ...]
    maxs: tuple[float, ...]

    def __post_init__(self):
        if len(self.mins) != N_FEATURES or len(self.maxs) != N_FEATURES:
            raise ValidationError(f"scaler must cover all {N_FEATURES} features")
        for i in SCALED_INDICES:
            if self.mins[i] > self.maxs[i]:
                raise ValidationError(f"scaler index {i}: min exceeds max")


def fit_scaler(train: list[np.ndarray]) -> FeatureScaler:
    """Fit per-index min/max over training feature vectors."""
    if not train:
        raise ValidationError("cannot fit a scaler on an empty training list")
    matrix = np.asarray(train, dtype=float)
    if matrix.ndim != 2 or matrix.shape[1] != N_FEATURES:
        raise ValidationError(f"expected vectors of length {N_FEATURES}")
    return FeatureScaler(
        mins=tuple(matrix.min(axis=0)),
        maxs=tuple(matrix.max(axis=0)),
    )


def apply_scaler(scaler: FeatureScaler, raw: np.ndarray) -> np.ndarray:
    """Min-max scale to [0, 1], clamping out-of-range values.

    Degenerate indices (min == max on the training corpus) map to 0.5;
    binary indices pass through.
    """
    raw = np.asarray(raw, dtype=float)
    if raw.shape != (N_FEATURES,):
        raise ValidationError(f"expected a vector of length {N_FEATURES}")
    scaled = raw.copy()
    for i in SCALED_INDICES:
        lo, hi = scaler.mins[i], scaler.maxs[i]
        if hi == lo:
            scaled[i] = 0.5
        else:
            scaled[i] = min(1.0, max(0.0, (raw[i] - lo) / (hi - lo)))
    return scaled
