"""Data model, JSONL ingestion, text normalization and split construction.

Messages are immutable after load; collections are safe to share across
concurrent readers. The JSONL wire format is one UTF-8 object per line with
fields ``id``, ``text``, ``lang``, ``event_id`` and optional ``informative``
(bool) / ``categories`` (list of category names).
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .errors import IntegrityError, ParseError, ValidationError


class CategoryId(Enum):
    """The eight information categories messages can be labeled with.

    Enumeration order is the canonical presentation order used when
    category-level outputs are combined into one event-level report.
    """

    CASUALTIES = "Casualties"
    DAMAGE = "Damage"
    DANGER = "Danger"
    GOVERNMENT = "Government"
    SENSOR = "Sensor"
    SERVICE = "Service"
    WATER = "Water"
    WEATHER = "Weather"

    @classmethod
    def from_name(cls, name: str) -> "CategoryId":
        for member in cls:
            if member.value == name:
                return member
        valid = ", ".join(m.value for m in cls)
        raise ValidationError(f"unknown category {name!r} (expected one of: {valid})")


_LANG_RE = re.compile(r"^[a-z]{2}$")

# URL / mention markers. URLs are scheme-prefixed plus the platform's bare
# shortener form; mentions must not start mid-word.
URL_RE = re.compile(r"(?:https?://\S+|(?<!\w)t\.co/\S+)")
MENTION_RE = re.compile(r"(?<!\w)@\w+")
_HASHTAG_RE = re.compile(r"(?<!\w)#(\w+)")
_CAMEL_RE = re.compile(r"(?<=[a-z])(?=[A-Z])")
_WS_RE = re.compile(r"\s+")

_SENTENCE_SPLIT_RE = re.compile(r"(?<=[.!?])\s+")


@dataclass(frozen=True)
class Message:
    """One social-media post with optional human labels."""

    id: str
    text: str
    lang: str
    event_id: str
    informative: bool | None = None
    categories: frozenset[CategoryId] = frozenset()

    def __post_init__(self):
        if not self.id:
            raise ValidationError("message id must be non-empty")
        if not self.text:
            raise ValidationError(f"message {self.id!r}: text must be non-empty")
        if not _LANG_RE.match(self.lang):
            raise ValidationError(
                f"message {self.id!r}: lang must be a two-letter lowercase code, got {self.lang!r}"
            )
        if not self.event_id:
            raise ValidationError(f"message {self.id!r}: event_id must be non-empty")


@dataclass(frozen=True)
class EventCollection:
    """All annotated messages for a single event, in file order."""

    event_id: str
    name: str
    messages: tuple[Message, ...] = ()

    def __post_init__(self):
        seen: set[str] = set()
        for msg in self.messages:
            if msg.event_id != self.event_id:
                raise IntegrityError(
                    f"message {msg.id!r} has event_id {msg.event_id!r}, "
                    f"expected {self.event_id!r}"
                )
            if msg.id in seen:
                raise IntegrityError(f"duplicate message id {msg.id!r}")
            seen.add(msg.id)

    @property
    def languages(self) -> set[str]:
        return {m.lang for m in self.messages}

    @property
    def informative_count(self) -> int:
        return sum(1 for m in self.messages if m.informative)

    def __len__(self) -> int:
        return len(self.messages)


@dataclass(frozen=True)
class ReferenceReport:
    """Official report text used as summarization ground truth."""

    event_id: str
    text: str

    def __post_init__(self):
        if not self.text:
            raise ValidationError(f"report for {self.event_id!r}: text must be non-empty")


@dataclass(frozen=True)
class SplitPair:
    """One train/test fold. Train and test partition the input by id."""

    train: tuple[Message, ...]
    test: tuple[Message, ...]
    description: str = ""


def _record_to_message(record: dict, line: int) -> Message:
    if not isinstance(record, dict):
        raise ParseError("record is not a JSON object", line)
    for key in ("id", "text", "lang", "event_id"):
        if key not in record:
            raise ParseError(f"missing required field {key!r}", line)
        if not isinstance(record[key], str):
            raise ParseError(f"field {key!r} must be a string", line)
    informative = record.get("informative")
    if informative is not None and not isinstance(informative, bool):
        raise ParseError("field 'informative' must be a boolean", line)
    raw_categories = record.get("categories", [])
    if not isinstance(raw_categories, list):
        raise ParseError("field 'categories' must be an array", line)
    try:
        categories = frozenset(CategoryId.from_name(c) for c in raw_categories)
        return Message(
            id=record["id"],
            text=record["text"],
            lang=record["lang"],
            event_id=record["event_id"],
            informative=informative,
            categories=categories,
        )
    except ValidationError as exc:
        raise ParseError(str(exc), line) from exc


def load_messages(path: str | Path, format: str = "jsonl") -> EventCollection:
    """Load one event's messages from a JSONL file, preserving file order.

    Raises ParseError (with line number) for malformed records and
    IntegrityError for duplicate ids or mixed event ids.
    """
    if format != "jsonl":
        raise ValidationError(f"unsupported format {format!r} (only 'jsonl')")
    path = Path(path)
    messages: list[Message] = []
    seen: set[str] = set()
    event_id: str | None = None
    with path.open(encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON ({exc.msg})", line_no) from exc
            msg = _record_to_message(record, line_no)
            if msg.id in seen:
                raise IntegrityError(f"duplicate message id {msg.id!r} at line {line_no}")
            seen.add(msg.id)
            if event_id is None:
                event_id = msg.event_id
            elif msg.event_id != event_id:
                raise IntegrityError(
                    f"line {line_no}: event_id {msg.event_id!r} differs from {event_id!r}"
                )
            messages.append(msg)
    if event_id is None:
        # Empty file: derive the event id from the file name.
        event_id = path.stem
    return EventCollection(event_id=event_id, name=event_id, messages=tuple(messages))


def message_to_record(msg: Message) -> dict:
    """Canonical JSON record for a message (fixed key order, sorted categories)."""
    record: dict = {
        "id": msg.id,
        "text": msg.text,
        "lang": msg.lang,
        "event_id": msg.event_id,
    }
    if msg.informative is not None:
        record["informative"] = msg.informative
    if msg.categories:
        record["categories"] = sorted(c.value for c in msg.categories)
    return record


def dump_messages(collection: EventCollection) -> str:
    """Serialize a collection to canonical JSONL (round-trips byte-identically)."""
    lines = [
        json.dumps(message_to_record(m), ensure_ascii=False) for m in collection.messages
    ]
    return "".join(line + "\n" for line in lines)


def _split_hashtag(match: re.Match) -> str:
    body = match.group(1).replace("_", " ")
    return _CAMEL_RE.sub(" ", body)


def normalize(text: str) -> str:
    """Normalize a raw post: URL/USER tokens, hashtags split into words.

    Punctuation and stopwords are preserved (downstream steps rely on
    sentence structure). Idempotent.
    """
    if not text:
        raise ValidationError("cannot normalize empty text")
    text = URL_RE.sub("URL", text)
    text = MENTION_RE.sub("USER", text)
    text = _HASHTAG_RE.sub(_split_hashtag, text)
    return _WS_RE.sub(" ", text).strip()


def split_sentences(text: str) -> list[str]:
    """Split on terminal punctuation (. ! ?) plus end-of-text. Never empty."""
    parts = [p for p in _SENTENCE_SPLIT_RE.split(text) if p.strip()]
    return parts if parts else [text]


def split_leave_one_language_out(collection: EventCollection, held_out: str) -> SplitPair:
    """Hold out all messages in one language; train on the rest."""
    if held_out not in collection.languages:
        available = ", ".join(sorted(collection.languages))
        raise ValidationError(
            f"language {held_out!r} not present in event {collection.event_id!r} "
            f"(available: {available})"
        )
    if len(collection.languages) < 2:
        raise ValidationError(
            f"event {collection.event_id!r} has a single language; nothing to train on"
        )
    test = tuple(m for m in collection.messages if m.lang == held_out)
    train = tuple(m for m in collection.messages if m.lang != held_out)
    return SplitPair(train=train, test=test, description=f"{collection.event_id}:{held_out}")


def split_leave_one_event_out(
    collections: list[EventCollection], held_out: str
) -> SplitPair:
    """Hold out one whole event; train on all messages of the others."""
    ids = [c.event_id for c in collections]
    if held_out not in ids:
        raise ValidationError(
            f"unknown event {held_out!r} (available: {', '.join(sorted(ids))})"
        )
    if len(collections) < 2:
        raise ValidationError("need at least two events for leave-one-event-out")
    test: list[Message] = []
    train: list[Message] = []
    for coll in collections:
        target = test if coll.event_id == held_out else train
        target.extend(coll.messages)
    return SplitPair(train=tuple(train), test=tuple(test), description=f"event:{held_out}")


def load_reports(directory: str | Path) -> dict[str, ReferenceReport]:
    """Load ``<event_id>.report.txt`` files from a directory."""
    directory = Path(directory)
    reports: dict[str, ReferenceReport] = {}
    for path in sorted(directory.glob("*.report.txt")):
        event_id = path.name[: -len(".report.txt")]
        text = path.read_text(encoding="utf-8").strip()
        reports[event_id] = ReferenceReport(event_id=event_id, text=text)
    return reports
