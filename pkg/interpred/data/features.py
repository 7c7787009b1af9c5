from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable
import json
import logging

import numpy as np

from interpred.context.regions import NUM_REGIONS
from interpred.utils.validation import ensure_finite

logger = logging.getLogger(__name__)


class FeatureFileError(ValueError):
    """Schema violation in a feature file; carries the offending record index."""

    def __init__(self, index: int, message: str) -> None:
        super().__init__(f"record {index}: {message}")
        self.index = index


@dataclass(frozen=True)
class VideoRecord:
    """
    Featurised video. Labels are 1-based class ids; `group` is the actor group
    used by leave-one-sequence-out evaluation.
      context_seq:      (n, 7, dim)   frame context sequences
      flow_context_seq: (n - 1, 7, dim) flow-image context sequences
      flow_feats:       (n - 1, dim)  temporal-model input per flow image
    """

    id: str
    label: int
    group: int
    context_seq: np.ndarray
    flow_context_seq: np.ndarray
    flow_feats: np.ndarray

    def __post_init__(self) -> None:
        validate_record(self)

    @property
    def n(self) -> int:
        return int(self.context_seq.shape[0])

    @property
    def dim(self) -> int:
        return int(self.context_seq.shape[2])


def validate_record(rec: VideoRecord) -> None:
    ctx, fctx, ff = rec.context_seq, rec.flow_context_seq, rec.flow_feats
    if ctx.ndim != 3 or ctx.shape[1] != NUM_REGIONS:
        raise ValueError(f"context_seq must be (n, {NUM_REGIONS}, dim), got {ctx.shape}")
    n, _, dim = ctx.shape
    if n < 1:
        raise ValueError(f"video {rec.id} has no frames")
    # a one-frame prefix keeps the first flow
    flows = max(n - 1, 1)
    if fctx.shape != (flows, NUM_REGIONS, dim):
        raise ValueError(
            f"flow_context_seq must be ({flows}, {NUM_REGIONS}, {dim}), got {fctx.shape}"
        )
    if ff.shape != (flows, dim):
        raise ValueError(f"flow_feats must be ({flows}, {dim}), got {ff.shape}")
    if rec.label < 1:
        raise ValueError(f"label must be >= 1, got {rec.label}")
    for name, arr in (("context_seq", ctx), ("flow_context_seq", fctx), ("flow_feats", ff)):
        ensure_finite(arr, name)


def record_to_dict(rec: VideoRecord) -> dict:
    return {
        "id": rec.id,
        "label": rec.label,
        "group": rec.group,
        "context_seq": rec.context_seq.tolist(),
        "flow_context_seq": rec.flow_context_seq.tolist(),
        "flow_feats": rec.flow_feats.tolist(),
    }


def record_from_dict(data: dict) -> VideoRecord:
    return VideoRecord(
        id=str(data["id"]),
        label=int(data["label"]),
        group=int(data["group"]),
        context_seq=np.asarray(data["context_seq"], dtype=np.float64),
        flow_context_seq=np.asarray(data["flow_context_seq"], dtype=np.float64),
        flow_feats=np.asarray(data["flow_feats"], dtype=np.float64),
    )


def write_feature_file(records: Iterable[VideoRecord], path: Path) -> int:
    """JSON Lines, one video per line. Floats are written with repr so reads are bit-exact."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(record_to_dict(rec)))
            fh.write("\n")
            count += 1
    logger.info("wrote %d records to %s", count, path)
    return count


def load_feature_file(path: Path) -> list[VideoRecord]:
    records: list[VideoRecord] = []
    dim: int | None = None
    with open(path, encoding="utf-8") as fh:
        for index, line in enumerate(fh):
            if not line.strip():
                continue
            try:
                rec = record_from_dict(json.loads(line))
            except (KeyError, TypeError, ValueError) as exc:
                raise FeatureFileError(index, str(exc)) from exc
            if dim is None:
                dim = rec.dim
            elif rec.dim != dim:
                raise FeatureFileError(
                    index, f"video {rec.id} has feature dim {rec.dim}, expected {dim}"
                )
            records.append(rec)
    logger.info("loaded %d records from %s", len(records), path)
    return records
