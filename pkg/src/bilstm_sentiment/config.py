"""Pipeline configuration: nested dataclasses addressed by flat dotted keys."""

from __future__ import annotations

import dataclasses
import hashlib
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Optional, Union, get_args, get_origin, get_type_hints

import yaml

from .train import TrainingConfig


class ConfigError(ValueError):
    """Bad configuration key or value."""


@dataclass
class PathsConfig:
    dataset: str = "data/Musical_Instruments_5.json"
    stopwords: Optional[str] = None  # None: bundled NLTK snapshot
    sentiwordnet: str = "data/lexicon/sentiwordnet_3.0.tsv.gz"
    aux_lexicon: str = "data/lexicon/pattern_adjectives.tsv"
    embeddings: Optional[str] = None  # pretrained "word v1 .. vd" file; skips skip-gram training
    workdir: str = "work"


@dataclass
class CorpusConfig:
    positive_min: int = 4
    negative_max: int = 2
    split_ratio: float = 0.7
    max_len: Optional[int] = 200


@dataclass
class LexiconConfig:
    default: float = 1.0


@dataclass
class FeaturesConfig:
    size: int = 200
    alpha: float = 0.025
    min_alpha: float = 1e-4
    min_count: int = 5
    iters: int = 5
    window: int = 5
    negatives: int = 5
    batch_words: int = 10000
    aspect_k: int = 160


@dataclass
class ModelSection:
    d_h: int = 128
    d_a: int = 128
    init_range: float = 0.08
    forget_bias: float = 1.0


@dataclass
class ExplainConfig:
    aggregator: str = "average"
    top_aspects: int = 10
    top_sentiment: int = 9
    threshold: float = 0.3
    review: str = ""  # empty: the 13-token first review of the corpus


@dataclass
class SweepConfig:
    parameter: str = "epochs"
    values: list = field(default_factory=lambda: [8, 10, 12, 17])


@dataclass
class PipelineConfig:
    seed: int = 42
    paths: PathsConfig = field(default_factory=PathsConfig)
    corpus: CorpusConfig = field(default_factory=CorpusConfig)
    lexicon: LexiconConfig = field(default_factory=LexiconConfig)
    features: FeaturesConfig = field(default_factory=FeaturesConfig)
    model: ModelSection = field(default_factory=ModelSection)
    train: TrainingConfig = field(default_factory=TrainingConfig)
    explain: ExplainConfig = field(default_factory=ExplainConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)

    def flat(self) -> dict[str, Any]:
        out = {}

        def walk(obj, prefix):
            for f in fields(obj):
                value = getattr(obj, f.name)
                if dataclasses.is_dataclass(value):
                    walk(value, prefix + f.name + ".")
                else:
                    out[prefix + f.name] = value
        walk(self, "")
        return out

    def set(self, key: str, value: Any) -> None:
        *parents, leaf = key.split(".")
        obj = self
        for p in parents:
            if not hasattr(obj, p) or not dataclasses.is_dataclass(getattr(obj, p)):
                raise ConfigError(f"unknown config key {key!r}")
            obj = getattr(obj, p)
        hints = get_type_hints(type(obj))
        if leaf not in hints or dataclasses.is_dataclass(getattr(obj, leaf)):
            raise ConfigError(f"unknown config key {key!r}")
        setattr(obj, leaf, _coerce(key, value, hints[leaf]))

    def validate(self) -> "PipelineConfig":
        try:
            TrainingConfig(**dataclasses.asdict(self.train))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if not 0 < self.corpus.split_ratio < 1:
            raise ConfigError("corpus.split_ratio must lie in (0, 1)")
        if self.explain.aggregator not in ("max", "sum", "average", "mean"):
            raise ConfigError("explain.aggregator must be max, sum or average")
        if self.features.min_count < 1 or self.features.aspect_k < 1:
            raise ConfigError("features.min_count and features.aspect_k must be >= 1")
        return self


def _coerce(key, value, hint):
    origin = get_origin(hint)
    if origin is Union:  # Optional[X]
        if value is None or (isinstance(value, str) and value.lower() in ("none", "null", "")):
            return None
        hint = next(a for a in get_args(hint) if a is not type(None))
        origin = get_origin(hint)
    try:
        if hint is bool:
            if isinstance(value, str):
                if value.lower() in ("true", "1", "yes", "on"):
                    return True
                if value.lower() in ("false", "0", "no", "off"):
                    return False
                raise ValueError(value)
            return bool(value)
        if hint is int:
            if isinstance(value, float) and not value.is_integer():
                raise ValueError(value)
            return int(value)
        if hint is float:
            return float(value)
        if hint is str:
            return str(value)
        if hint is list or origin is list:
            if isinstance(value, str):
                value = yaml.safe_load(value if value.startswith("[") else f"[{value}]")
            return list(value)
    except (TypeError, ValueError):
        raise ConfigError(f"bad value {value!r} for {key}") from None
    return value


def _flatten(mapping: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in mapping.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        else:
            out[key] = v
    return out


def load_config(path=None, overrides: Optional[dict] = None) -> PipelineConfig:
    """Defaults, then the YAML file (flat dotted or nested keys), then overrides."""
    cfg = PipelineConfig()
    if path is not None:
        try:
            data = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
        except yaml.YAMLError as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: expected a mapping of keys to values")
        for key, value in _flatten(data).items():
            cfg.set(key, value)
    for key, value in (overrides or {}).items():
        cfg.set(key, value)
    return cfg.validate()


def dump_config(cfg: PipelineConfig) -> str:
    return yaml.safe_dump(cfg.flat(), sort_keys=True)


def derive_seed(root: int, label: str) -> int:
    """Stable per-stage seed from the root seed and a stage label."""
    digest = hashlib.sha256(f"{root}:{label}".encode()).digest()
    return int.from_bytes(digest[:4], "little") & 0x7FFFFFFF
