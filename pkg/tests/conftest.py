from __future__ import annotations

import json

import matplotlib

matplotlib.use("Agg")

import numpy as np
import pytest

from interpred.config.models import (
    DatasetConfig,
    FullConfig,
    FusionConfig,
    ModelConfig,
    full_config_to_dict,
)
from interpred.context.regions import NUM_REGIONS
from interpred.data.features import VideoRecord


def make_record(
    rng: np.random.Generator,
    video_id: str,
    label: int,
    group: int = 0,
    n: int = 6,
    dim: int = 5,
    signal: float = 0.0,
) -> VideoRecord:
    """Random features; `signal` adds a class-dependent offset to channel label - 1."""
    ctx = rng.uniform(0, 1, size=(n, NUM_REGIONS, dim))
    fctx = rng.uniform(0, 1, size=(n - 1, NUM_REGIONS, dim))
    if signal:
        ctx[..., (label - 1) % dim] += signal
        fctx[..., (label - 1) % dim] += signal
    return VideoRecord(
        id=video_id,
        label=label,
        group=group,
        context_seq=ctx,
        flow_context_seq=fctx,
        flow_feats=fctx[:, 0, :].copy(),
    )


def make_dataset(seed: int, m: int = 3, per_class: int = 8, groups: int = 4, **kw) -> list[VideoRecord]:
    rng = np.random.default_rng(seed)
    return [
        make_record(rng, f"c{label}_v{j:03d}", label, group=j % groups, **kw)
        for label in range(1, m + 1)
        for j in range(per_class)
    ]


@pytest.fixture
def tiny_config() -> FullConfig:
    return FullConfig(
        seed=11,
        dataset=DatasetConfig(num_classes=3, videos_per_class=4, frames_per_video=6, groups=2),
        model=ModelConfig(
            lstm_units=4, structural_hidden=4, head_hidden=6, k=3, learning_rate=0.1, epochs=3, batch_size=8
        ),
        fusion=FusionConfig(iterations=300, validation_fraction=0.25),
    )


@pytest.fixture
def write_config(tmp_path):
    def _write(cfg: FullConfig, name: str = "config.json"):
        path = tmp_path / name
        path.write_text(json.dumps(full_config_to_dict(cfg)), encoding="utf-8")
        return path

    return _write
