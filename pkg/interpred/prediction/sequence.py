from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence
import logging

import numpy as np

from interpred.data.features import VideoRecord
from interpred.fusion.ranking import FusionWeights, fuse_scores
from interpred.models.classifiers import (
    MODEL_ORDER,
    Classifier,
    StructuralModel,
    TemporalModel,
    pad_flow_sequence,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TimestepDecision:
    t: int
    c_t: np.ndarray
    p_t: int


def per_step_label(c_t: np.ndarray) -> int:
    """1-based argmax; ties go to the smallest class index."""
    c_t = np.asarray(c_t, dtype=np.float64)
    if c_t.size == 0:
        raise ValueError("empty score vector")
    return int(np.argmax(c_t)) + 1


def vote_histogram(labels: Sequence[int], m: int | None = None) -> np.ndarray:
    labels = np.asarray(labels, dtype=int)
    size = int(labels.max()) if m is None else m
    return np.bincount(labels - 1, minlength=size)


def majority_vote(labels: Sequence[int]) -> int:
    """Most frequent label; ties go to the smallest class index."""
    if len(labels) == 0:
        raise ValueError("majority_vote of an empty label list")
    if min(labels) < 1:
        raise ValueError("labels are 1-based")
    return int(np.argmax(vote_histogram(labels))) + 1


@dataclass(frozen=True)
class ScoreStreams:
    """
    Per-step model outputs of one video, computed once and sliced per prefix.
      spatial, spatial_structural:      (n, m) one row per frame
      temporal, temporal_structural:    (n - 1, m) one row per flow index
    """

    spatial: np.ndarray
    temporal: np.ndarray
    spatial_structural: np.ndarray
    temporal_structural: np.ndarray

    @property
    def n(self) -> int:
        return int(self.spatial.shape[0])

    def matrices(self, upto: int) -> np.ndarray:
        """
        Score matrices (upto, 4, m) for the prefix of `upto` frames. Step t uses frame t
        and flow min(t, upto - 1); with a single observed frame the first flow is used.
        """
        if not (1 <= upto <= self.n):
            raise ValueError(f"upto must be in [1, {self.n}], got {upto}")
        steps = np.arange(upto)
        flow_idx = np.minimum(steps, max(upto - 2, 0))
        return np.stack(
            [
                self.spatial[steps],
                self.temporal[flow_idx],
                self.spatial_structural[steps],
                self.temporal_structural[flow_idx],
            ],
            axis=1,
        )


def _require(models: Mapping[str, Classifier]) -> None:
    missing = [name for name in MODEL_ORDER if name not in models]
    if missing:
        raise ValueError(f"missing models: {missing}")


def temporal_stacks(flow_feats: np.ndarray, k: int) -> np.ndarray:
    """Padded k-stack ending at every flow index, (n_flows, k, dim)."""
    return np.stack(
        [np.asarray(pad_flow_sequence(list(flow_feats[: t + 1]), t + 1, k)) for t in range(len(flow_feats))]
    )


def score_streams(models: Mapping[str, Classifier], video: VideoRecord) -> ScoreStreams:
    _require(models)
    temporal = models["temporal"]
    if not isinstance(temporal, TemporalModel):
        raise ValueError("the 'temporal' entry must be a TemporalModel")
    for name in ("spatial_structural", "temporal_structural"):
        if not isinstance(models[name], StructuralModel):
            raise ValueError(f"the '{name}' entry must be a StructuralModel")
    return ScoreStreams(
        spatial=models["spatial"].forward(video.context_seq[:, 0, :]),
        temporal=temporal.forward(temporal_stacks(video.flow_feats, temporal.k)),
        spatial_structural=models["spatial_structural"].forward(video.context_seq),
        temporal_structural=models["temporal_structural"].forward(video.flow_context_seq),
    )


def decide(matrices: np.ndarray, weights: FusionWeights) -> tuple[int, list[TimestepDecision]]:
    """Fuse each step's score matrix, take the per-step argmax, then majority-vote."""
    fused = fuse_scores(matrices, weights)
    decisions = [
        TimestepDecision(t=t + 1, c_t=c, p_t=per_step_label(c)) for t, c in enumerate(fused)
    ]
    return majority_vote([d.p_t for d in decisions]), decisions


def predict_sequence(
    models: Mapping[str, Classifier],
    weights: FusionWeights,
    video: VideoRecord,
    upto: int,
) -> tuple[int, list[TimestepDecision]]:
    """Sequence label p* from the first `upto` frames, with the per-step decisions."""
    if not (1 <= upto <= video.n):
        raise ValueError(f"upto must be in [1, {video.n}], got {upto}")
    streams = score_streams(models, video)
    return decide(streams.matrices(upto), weights)
