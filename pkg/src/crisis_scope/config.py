"""Pipeline configuration: JSON file loading and backend construction.

The config file is JSON; the ``CRISIS_SCOPE_CONFIG`` environment variable
overrides the default path. Backend factories are registries so external
encoder/generator implementations can plug in without touching this module.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Callable

from .encoder import EncoderBackend, MockEncoder, SerializingEncoder
from .errors import SchemaError, ValidationError
from .linguistic import AnnotatorRegistry, RuleAnnotator
from .models import ModelConfig
from .summarize import GenerationBackend, LeadGenerationBackend, SummaryConfig

DEFAULT_CONFIG_PATH = "crisis-scope.json"
ENV_CONFIG_PATH = "CRISIS_SCOPE_CONFIG"


def _load_alias(path: str | None) -> dict[str, str] | None:
    if path is None:
        return None
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(data, dict):
        raise SchemaError("alias table must be a JSON object of word -> word")
    return {str(k): str(v) for k, v in data.items()}


ENCODER_FACTORIES: dict[str, Callable[[dict], EncoderBackend]] = {
    "mock": lambda spec: MockEncoder(
        dim=int(spec.get("dim", 1024)),
        seed=int(spec.get("seed", 0)),
        alias=_load_alias(spec.get("alias_path")),
    ),
}

GENERATOR_FACTORIES: dict[str, Callable[[dict], GenerationBackend]] = {
    "lead": lambda spec: LeadGenerationBackend(
        max_input_tokens=spec.get("max_input_tokens")
    ),
}

ANNOTATOR_FACTORIES: dict[str, Callable[[dict], object]] = {
    "rule": lambda spec: RuleAnnotator(),
}


def register_encoder_factory(name: str, factory: Callable[[dict], EncoderBackend]) -> None:
    ENCODER_FACTORIES[name] = factory


def register_generator_factory(
    name: str, factory: Callable[[dict], GenerationBackend]
) -> None:
    GENERATOR_FACTORIES[name] = factory


@dataclass
class DataPaths:
    messages: list[str] = field(default_factory=list)
    reports_dir: str | None = None
    queries_dir: str | None = None

    def validate(self) -> None:
        for path in self.messages:
            if not Path(path).exists():
                raise ValidationError(f"messages file not found: {path}")
        for path in (self.reports_dir, self.queries_dir):
            if path is not None and not Path(path).is_dir():
                raise ValidationError(f"directory not found: {path}")


@dataclass
class PipelineConfig:
    """Everything a run needs: backends, model knobs, data paths and seed."""

    seed: int = 0
    k: int = 100
    request_timeout_s: float = 60.0
    encoder: dict = field(default_factory=lambda: {"name": "mock"})
    generator: dict = field(default_factory=lambda: {"name": "lead"})
    annotators: dict = field(default_factory=lambda: {"en": "rule"})
    model: ModelConfig = field(default_factory=ModelConfig)
    summary: SummaryConfig = field(default_factory=SummaryConfig)
    data: DataPaths = field(default_factory=DataPaths)

    def validate(self) -> None:
        if self.k < 1:
            raise ValidationError("top-k must be >= 1")
        if self.encoder.get("name") not in ENCODER_FACTORIES:
            raise ValidationError(f"unknown encoder backend {self.encoder.get('name')!r}")
        if self.generator.get("name") not in GENERATOR_FACTORIES:
            raise ValidationError(
                f"unknown generation backend {self.generator.get('name')!r}"
            )
        for lang, kind in self.annotators.items():
            name = kind if isinstance(kind, str) else kind.get("name")
            if name not in ANNOTATOR_FACTORIES:
                raise ValidationError(f"unknown annotator backend {name!r} for {lang!r}")
        self.model.validate()
        self.summary.validate()
        self.data.validate()

    def build_encoder(self) -> EncoderBackend:
        spec = dict(self.encoder)
        spec.setdefault("seed", self.seed)
        backend = ENCODER_FACTORIES[spec["name"]](spec)
        if not backend.concurrent_safe:
            backend = SerializingEncoder(backend)
        return backend

    def build_generator(self) -> GenerationBackend:
        return GENERATOR_FACTORIES[self.generator["name"]](dict(self.generator))

    def build_annotators(self) -> AnnotatorRegistry:
        registry = AnnotatorRegistry()
        for lang, kind in self.annotators.items():
            spec = {"name": kind} if isinstance(kind, str) else dict(kind)
            registry.register(lang, ANNOTATOR_FACTORIES[spec["name"]](spec))
        return registry


def _dataclass_from_dict(cls, data: dict, context: str):
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise SchemaError(f"{context}: unknown fields {sorted(unknown)}")
    return cls(**data)


def config_from_dict(data: dict) -> PipelineConfig:
    if not isinstance(data, dict):
        raise SchemaError("config must be a JSON object")
    data = dict(data)
    seed = int(data.get("seed", 0))

    model_data = dict(data.pop("model", {}))
    model_data.setdefault("seed", seed)
    for key in ("embedding_mlp", "text_mlp", "similarity_mlp"):
        if key in model_data:
            model_data[key] = tuple(model_data[key])
    model = _dataclass_from_dict(ModelConfig, model_data, "model")

    summary_data = dict(data.pop("summary", {}))
    summary_data.setdefault("seed", seed)
    summary = _dataclass_from_dict(SummaryConfig, summary_data, "summary")

    data_paths = _dataclass_from_dict(DataPaths, dict(data.pop("data", {})), "data")

    config = _dataclass_from_dict(
        PipelineConfig,
        {**data, "model": model, "summary": summary, "data": data_paths},
        "config",
    )
    config.validate()
    return config


def load_config(path: str | Path | None = None) -> PipelineConfig:
    """Load config from an explicit path, $CRISIS_SCOPE_CONFIG, or the default."""
    if path is None:
        path = os.environ.get(ENV_CONFIG_PATH, DEFAULT_CONFIG_PATH)
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON ({exc.msg})") from exc
    return config_from_dict(data)
