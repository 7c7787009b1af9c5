from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Mapping, Sequence
import logging

import numpy as np
import pandas as pd

from interpred.data.features import VideoRecord
from interpred.fusion.ranking import FusionWeights
from interpred.models.classifiers import Classifier
from interpred.prediction.sequence import ScoreStreams, decide, score_streams

logger = logging.getLogger(__name__)

NUM_RATIOS = 10
RATIOS = tuple(round(i / NUM_RATIOS, 1) for i in range(1, NUM_RATIOS + 1))


def observed_length(n: int, i: int) -> int:
    """round(n * i / 10) with round-half-up, at least 1."""
    if not (1 <= i <= NUM_RATIOS):
        raise ValueError(f"observation ratio index must be in [1, {NUM_RATIOS}], got {i}")
    if n < 1:
        raise ValueError(f"video length must be >= 1, got {n}")
    length = int(Decimal(n * i).scaleb(-1).quantize(Decimal(1), rounding=ROUND_HALF_UP))
    return max(1, length)


def slice_observation(video: VideoRecord, i: int) -> VideoRecord:
    """The first round(n * i / 10) frames of a video and the flows observed with them."""
    u = observed_length(video.n, i)
    if u == video.n:
        return video
    flows = max(u - 1, 1)
    return VideoRecord(
        id=video.id,
        label=video.label,
        group=video.group,
        context_seq=video.context_seq[:u],
        flow_context_seq=video.flow_context_seq[:flows],
        flow_feats=video.flow_feats[:flows],
    )


@dataclass(frozen=True)
class RatioTable:
    """Accuracy at observation ratios 0.1 .. 1.0."""

    accuracy: np.ndarray

    def __post_init__(self) -> None:
        acc = np.asarray(self.accuracy, dtype=np.float64)
        if acc.shape != (NUM_RATIOS,):
            raise ValueError(f"ratio table needs {NUM_RATIOS} accuracies, got {acc.shape}")
        if np.any(acc < 0) or np.any(acc > 1):
            raise ValueError("accuracies must lie in [0, 1]")
        object.__setattr__(self, "accuracy", acc)

    def at(self, ratio: float) -> float:
        return float(self.accuracy[RATIOS.index(round(ratio, 1))])

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"ratio": RATIOS, "accuracy": self.accuracy})

    @classmethod
    def mean(cls, tables: Sequence["RatioTable"]) -> "RatioTable":
        if not tables:
            raise ValueError("cannot average zero tables")
        return cls(np.mean(np.stack([t.accuracy for t in tables]), axis=0))


def predicted_labels(streams: ScoreStreams, weights: FusionWeights) -> np.ndarray:
    """p* of one video at each of the ten observation ratios."""
    out = np.empty(NUM_RATIOS, dtype=int)
    for i in range(1, NUM_RATIOS + 1):
        p_star, _ = decide(streams.matrices(observed_length(streams.n, i)), weights)
        out[i - 1] = p_star
    return out


def evaluate_streams(
    streams: Sequence[ScoreStreams],
    labels: Sequence[int],
    weights: FusionWeights,
) -> RatioTable:
    if len(streams) == 0:
        raise ValueError("evaluate needs a non-empty test set")
    predictions = np.stack([predicted_labels(s, weights) for s in streams])
    correct = predictions == np.asarray(labels, dtype=int)[:, None]
    return RatioTable(correct.mean(axis=0))


def evaluate(
    test_set: Sequence[VideoRecord],
    models: Mapping[str, Classifier],
    weights: FusionWeights,
) -> RatioTable:
    """Fraction of test videos whose p* equals the label, per observation ratio."""
    streams = [score_streams(models, v) for v in test_set]
    return evaluate_streams(streams, [v.label for v in test_set], weights)


def evaluate_methods(
    test_set: Sequence[VideoRecord],
    models: Mapping[str, Classifier],
    methods: Mapping[str, FusionWeights],
) -> dict[str, RatioTable]:
    """One table per weighting; score streams are computed once per video."""
    streams = [score_streams(models, v) for v in test_set]
    labels = [v.label for v in test_set]
    tables = {name: evaluate_streams(streams, labels, w) for name, w in methods.items()}
    for name, table in tables.items():
        logger.info("%s: accuracy %.3f at ratio 0.5, %.3f at 1.0", name, table.at(0.5), table.at(1.0))
    return tables


def predictions_frame(
    test_set: Sequence[VideoRecord],
    models: Mapping[str, Classifier],
    weights: FusionWeights,
) -> pd.DataFrame:
    """Tidy rows (video_id, label, ratio, p_star, correct) for every test video and ratio."""
    rows = []
    for v in test_set:
        p = predicted_labels(score_streams(models, v), weights)
        for ratio, p_star in zip(RATIOS, p):
            rows.append(
                {
                    "video_id": v.id,
                    "label": v.label,
                    "ratio": ratio,
                    "p_star": int(p_star),
                    "correct": bool(p_star == v.label),
                }
            )
    return pd.DataFrame(rows, columns=["video_id", "label", "ratio", "p_star", "correct"])


def tables_frame(tables: Mapping[str, RatioTable]) -> pd.DataFrame:
    """Wide frame: one ratio column plus one accuracy column per method."""
    frame = pd.DataFrame({"ratio": RATIOS})
    for name, table in tables.items():
        frame[name] = table.accuracy
    return frame
