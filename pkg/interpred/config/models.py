from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Literal, get_args, get_origin, get_type_hints
import json
import warnings


@dataclass(frozen=True)
class DatasetConfig:
    source: Literal["synthetic", "feature_file"] = "synthetic"
    feature_file: str | None = None
    videos_dir: str | None = None
    num_classes: int = 4
    videos_per_class: int = 20
    frames_per_video: int = 24
    groups: int = 4
    width: int = 96
    height: int = 64


@dataclass(frozen=True)
class ExtractorConfig:
    kind: Literal["grid_histogram"] = "grid_histogram"
    grid: int = 4
    bins: int = 8
    flow_source: Literal["block_matching", "stored"] = "block_matching"
    block: int = 8
    search: int = 3


@dataclass(frozen=True)
class ModelConfig:
    lstm_units: int = 512
    structural_hidden: int = 128
    head_hidden: int = 512
    k: int = 7
    learning_rate: float = 0.05
    epochs: int = 30
    batch_size: int = 32
    clip_norm: float = 5.0

    @classmethod
    def desk(cls, **overrides) -> "ModelConfig":
        """Reduced sizes that train in minutes on a laptop CPU."""
        base = dict(lstm_units=32, structural_hidden=16, head_hidden=16)
        base.update(overrides)
        return cls(**base)


@dataclass(frozen=True)
class FusionConfig:
    C: float = 1.0
    iterations: int = 10_000
    validation_fraction: float = 0.25
    pair_source: Literal["validation", "train"] = "validation"


@dataclass(frozen=True)
class EvaluationConfig:
    mode: Literal["holdout", "loso"] = "holdout"
    test_group: int | None = None


@dataclass(frozen=True)
class FullConfig:
    seed: int
    dataset: DatasetConfig = field(default_factory=DatasetConfig)
    extractor: ExtractorConfig = field(default_factory=ExtractorConfig)
    model: ModelConfig = field(default_factory=ModelConfig)
    fusion: FusionConfig = field(default_factory=FusionConfig)
    evaluation: EvaluationConfig = field(default_factory=EvaluationConfig)


_SECTIONS = {
    "dataset": DatasetConfig,
    "extractor": ExtractorConfig,
    "model": ModelConfig,
    "fusion": FusionConfig,
    "evaluation": EvaluationConfig,
}


def full_config_to_dict(cfg: FullConfig) -> dict:
    return asdict(cfg)


def _section_from_dict(name: str, cls: type, data: dict):
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ValueError(f"unknown keys in config section '{name}': {unknown}")
    return cls(**data)


def full_config_from_dict(data: dict) -> FullConfig:
    if "seed" not in data:
        raise ValueError("config must define 'seed'")
    unknown = sorted(set(data) - set(_SECTIONS) - {"seed"})
    if unknown:
        raise ValueError(f"unknown top-level config keys: {unknown}")
    sections = {
        name: _section_from_dict(name, cls, data.get(name, {}))
        for name, cls in _SECTIONS.items()
    }
    return FullConfig(seed=int(data["seed"]), **sections)


def load_config(path: str | Path) -> FullConfig:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    cfg = full_config_from_dict(data)
    validate_config(cfg)
    return cfg


def _validate_positive(name: str, value: float) -> None:
    if not value > 0:
        raise ValueError(f"{name} must be > 0, got {value}")


def _validate_choices(name: str, section) -> None:
    for key, hint in get_type_hints(type(section)).items():
        if get_origin(hint) is Literal and getattr(section, key) not in get_args(hint):
            raise ValueError(
                f"{name}.{key} must be one of {list(get_args(hint))}, got {getattr(section, key)!r}"
            )


def validate_config(cfg: FullConfig) -> None:
    if not (0 <= cfg.seed < 2**64):
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {cfg.seed}")
    for name in _SECTIONS:
        _validate_choices(name, getattr(cfg, name))

    ds = cfg.dataset
    if ds.source == "feature_file":
        if ds.feature_file is None:
            raise ValueError("dataset.feature_file is required when source is 'feature_file'")
        if not Path(ds.feature_file).exists():
            raise ValueError(f"dataset.feature_file does not exist: {ds.feature_file}")
    if ds.videos_dir is not None and not Path(ds.videos_dir).is_dir():
        raise ValueError(f"dataset.videos_dir does not exist: {ds.videos_dir}")
    if not (1 <= ds.num_classes <= 8):
        raise ValueError(f"num_classes must be in [1, 8], got {ds.num_classes}")
    for name in ("videos_per_class", "groups"):
        _validate_positive(f"dataset.{name}", getattr(ds, name))
    if ds.frames_per_video < 2:
        raise ValueError(f"frames_per_video must be >= 2, got {ds.frames_per_video}")
    if ds.width < 32 or ds.height < 32:
        raise ValueError("synthetic frames must be at least 32x32 pixels")

    ex = cfg.extractor
    _validate_positive("extractor.grid", ex.grid)
    _validate_positive("extractor.bins", ex.bins)
    if ex.block < 4:
        raise ValueError(f"extractor.block must be >= 4, got {ex.block}")
    if ex.search < 1:
        raise ValueError(f"extractor.search must be >= 1, got {ex.search}")

    m = cfg.model
    for name in ("lstm_units", "structural_hidden", "head_hidden", "k", "epochs", "batch_size"):
        _validate_positive(f"model.{name}", getattr(m, name))
    _validate_positive("model.learning_rate", m.learning_rate)
    _validate_positive("model.clip_norm", m.clip_norm)
    if m.lstm_units < 64 or m.head_hidden < 64:
        warnings.warn(
            "model sizes are below the full-scale defaults (desk-scale run)",
            stacklevel=2,
        )

    fu = cfg.fusion
    _validate_positive("fusion.C", fu.C)
    _validate_positive("fusion.iterations", fu.iterations)
    if fu.pair_source == "validation" and not (0 < fu.validation_fraction < 1):
        raise ValueError(
            f"fusion.validation_fraction must be in (0, 1), got {fu.validation_fraction}"
        )

    ev = cfg.evaluation
    if ev.mode == "loso" and ds.source == "synthetic" and ds.groups < 2:
        raise ValueError("loso evaluation needs at least 2 groups")
    if ev.test_group is not None and ds.source == "synthetic" and not (
        0 <= ev.test_group < ds.groups
    ):
        raise ValueError(f"evaluation.test_group {ev.test_group} is not a valid group")
