from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence
import logging

import numpy as np

from interpred.config.models import ExtractorConfig, FullConfig, ModelConfig
from interpred.context.features import FeatureExtractor, featurize_video
from interpred.data.features import VideoRecord
from interpred.data.videos import RawVideo
from interpred.fusion.ranking import (
    FusionError,
    FusionWeights,
    RankPairs,
    build_pairs,
    nonneg_project_retrain,
)
from interpred.models.classifiers import (
    MODEL_ORDER,
    Classifier,
    SpatialModel,
    StructuralModel,
    TemporalModel,
)
from interpred.models.training import TrainParams, train_model
from interpred.numerics.random import make_rng, spawn
from interpred.prediction.sequence import score_streams, temporal_stacks

logger = logging.getLogger(__name__)

SPATIAL_TEMPORAL = (MODEL_ORDER.index("spatial"), MODEL_ORDER.index("temporal"))


def featurize_raw(video: RawVideo, extractor: FeatureExtractor, cfg: ExtractorConfig) -> VideoRecord:
    feats = featurize_video(video.frames, video.boxes, extractor, cfg, flows=video.flows)
    logger.debug("featurised %s (%d frames)", video.id, video.n)
    return VideoRecord(
        id=video.id,
        label=video.label,
        group=video.group,
        context_seq=feats.context_seq,
        flow_context_seq=feats.flow_context_seq,
        flow_feats=feats.flow_feats,
    )


@dataclass(frozen=True)
class Split:
    train: list[VideoRecord]
    validation: list[VideoRecord]
    test: list[VideoRecord]


def _stratified_holdout(
    videos: Sequence[VideoRecord], fraction: float, seed: int
) -> tuple[list[VideoRecord], list[VideoRecord]]:
    rng = make_rng(seed)
    train, held = [], []
    for label in sorted({v.label for v in videos}):
        members = sorted((v for v in videos if v.label == label), key=lambda v: v.id)
        n_held = int(round(fraction * len(members))) if len(members) >= 2 else 0
        n_held = min(max(n_held, 1 if len(members) >= 2 else 0), len(members) - 1)
        order = rng.permutation(len(members))
        held_idx = set(order[:n_held].tolist())
        for i, v in enumerate(members):
            (held if i in held_idx else train).append(v)
    return train, held


def split_training(videos: Sequence[VideoRecord], cfg: FullConfig) -> tuple[list[VideoRecord], list[VideoRecord]]:
    """Model-training videos and the videos whose score matrices train the fusion weights."""
    if cfg.fusion.pair_source == "train":
        return list(videos), list(videos)
    return _stratified_holdout(videos, cfg.fusion.validation_fraction, cfg.seed)


def split_dataset(videos: Sequence[VideoRecord], cfg: FullConfig) -> Split:
    """Holdout split: one actor group is the test set; the rest is split for training and fusion."""
    groups = sorted({v.group for v in videos})
    if len(groups) < 2:
        raise ValueError("a holdout split needs at least two actor groups")
    test_group = cfg.evaluation.test_group if cfg.evaluation.test_group is not None else groups[-1]
    if test_group not in groups:
        raise ValueError(f"test group {test_group} does not occur in the dataset")
    test = [v for v in videos if v.group == test_group]
    rest = [v for v in videos if v.group != test_group]
    train, validation = split_training(rest, cfg)
    logger.info(
        "split: %d train, %d fusion-validation, %d test (group %d)",
        len(train), len(validation), len(test), test_group,
    )
    return Split(train=train, validation=validation, test=test)


def training_examples(videos: Sequence[VideoRecord], kind: str, k: int) -> tuple[np.ndarray, np.ndarray]:
    """
    Inputs and 1-based labels for one model family:
      spatial              global-region feature of every frame
      temporal             every window of k consecutive flow features (one padded
                           stack when a video has fewer than k flows)
      spatial_structural   context sequence of every frame
      temporal_structural  context sequence of every flow image
    """
    inputs, labels = [], []
    for v in videos:
        if kind == "spatial":
            x = v.context_seq[:, 0, :]
        elif kind == "spatial_structural":
            x = v.context_seq
        elif kind == "temporal_structural":
            x = v.flow_context_seq
        elif kind == "temporal":
            stacks = temporal_stacks(v.flow_feats, k)
            x = stacks[k - 1 :] if len(stacks) >= k else stacks[-1:]
        else:
            raise ValueError(f"unknown model kind '{kind}'")
        inputs.append(x)
        labels.append(np.full(len(x), v.label))
    return np.concatenate(inputs), np.concatenate(labels)


def init_model(kind: str, dim: int, m: int, cfg: ModelConfig, rng) -> Classifier:
    if kind == "spatial":
        return SpatialModel.init(rng, dim, cfg.head_hidden, m)
    if kind == "temporal":
        return TemporalModel.init(rng, dim, cfg.head_hidden, m, cfg.k)
    return StructuralModel.init(rng, dim, cfg.lstm_units, cfg.structural_hidden, m, kind=kind)


def expected_arch(kind: str, dim: int, m: int, cfg: ModelConfig) -> dict:
    arch = {"kind": kind, "input_dim": dim, "num_classes": m}
    if kind in ("spatial", "temporal"):
        arch["head_hidden"] = cfg.head_hidden
    else:
        arch["head_hidden"] = cfg.structural_hidden
        arch["lstm_units"] = cfg.lstm_units
    if kind == "temporal":
        arch["k"] = cfg.k
    return arch


def train_models(videos: Sequence[VideoRecord], cfg: FullConfig, m: int | None = None) -> dict[str, Classifier]:
    """Train the four model families; each gets its own child generator of cfg.seed."""
    if not videos:
        raise ValueError("no training videos")
    m = m if m is not None else max(v.label for v in videos)
    dim = videos[0].dim
    children = spawn(make_rng(cfg.seed), len(MODEL_ORDER))
    models: dict[str, Classifier] = {}
    for kind, rng in zip(MODEL_ORDER, children):
        inputs, labels = training_examples(videos, kind, cfg.model.k)
        model = init_model(kind, dim, m, cfg.model, rng)
        hp = TrainParams(
            learning_rate=cfg.model.learning_rate,
            epochs=cfg.model.epochs,
            batch_size=cfg.model.batch_size,
            seed=int(rng.integers(2**63)),
            clip_norm=cfg.model.clip_norm,
        )
        logger.info("training %s model on %d examples", kind, len(inputs))
        models[kind], _ = train_model(model, inputs, labels, hp)
    return models


def fusion_pairs(models: dict[str, Classifier], videos: Sequence[VideoRecord]) -> RankPairs:
    """Ranking pairs from every video's score matrix at every time step."""
    matrices = []
    for v in videos:
        streams = score_streams(models, v)
        matrices.extend((S, v.label) for S in streams.matrices(streams.n))
    return build_pairs(matrices)


@dataclass
class Bundle:
    """Four trained models with the learned fusion weights and the baseline weightings."""

    models: dict[str, Classifier]
    weights: FusionWeights
    baselines: dict[str, FusionWeights] = field(default_factory=dict)

    def methods(self) -> dict[str, FusionWeights]:
        out = {"fused": self.weights, "average": FusionWeights.uniform()}
        out.update(self.baselines)
        out.update({name: FusionWeights.selector(name) for name in MODEL_ORDER})
        return out


def fit_fusion(
    models: dict[str, Classifier], videos: Sequence[VideoRecord], cfg: FullConfig
) -> tuple[FusionWeights, dict[str, FusionWeights]]:
    """Learned weights over all four models plus the spatial+temporal ranking baseline."""
    pairs = fusion_pairs(models, videos)
    logger.info("fusion: %d ranking pairs from %d videos", len(pairs), len(videos))
    weights = nonneg_project_retrain(pairs, cfg.fusion.C, cfg.fusion.iterations)
    baselines = {}
    try:
        baselines["sp_tp_rank"] = nonneg_project_retrain(
            pairs, cfg.fusion.C, cfg.fusion.iterations, active=SPATIAL_TEMPORAL
        )
    except FusionError as exc:
        logger.warning("spatial+temporal ranking baseline unavailable: %s", exc)
    return weights, baselines


def train_bundle(videos: Sequence[VideoRecord], cfg: FullConfig, m: int | None = None) -> Bundle:
    """Split off fusion-validation videos, train the four models, learn the weights."""
    m = m if m is not None else max(v.label for v in videos)
    train, validation = split_training(videos, cfg)
    models = train_models(train, cfg, m)
    weights, baselines = fit_fusion(models, validation, cfg)
    return Bundle(models=models, weights=weights, baselines=baselines)
