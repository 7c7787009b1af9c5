from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, Sequence
import logging

import numpy as np

from interpred.config.models import ExtractorConfig
from interpred.context.flow import block_matching_flow, encode_flow
from interpred.context.regions import BoundingBox, ContextSequence, build_context_regions

logger = logging.getLogger(__name__)


class FeatureExtractor(Protocol):
    dim: int

    def __call__(self, region: np.ndarray) -> np.ndarray: ...


def _cell_edges(length: int, cells: int) -> np.ndarray:
    # reduceat start indices; repeated starts on regions smaller than the grid
    # collapse a cell onto a single row/column
    return np.minimum(np.arange(cells) * length // cells, length - 1)


@dataclass(frozen=True)
class GridHistogramExtractor:
    """
    Resolution-independent toy descriptor: the region is split into grid x grid
    cells; each cell contributes its 3 mean channel intensities (scaled to [0, 1])
    followed by a `bins`-bin histogram of gradient orientations weighted by
    gradient magnitude (normalised by cell area and 255).
    """

    grid: int = 4
    bins: int = 8

    @property
    def dim(self) -> int:
        return self.grid * self.grid * (3 + self.bins)

    def __call__(self, region: np.ndarray) -> np.ndarray:
        region = np.asarray(region, dtype=np.float64)
        if region.ndim != 3 or region.shape[2] != 3 or region.shape[0] == 0 or region.shape[1] == 0:
            raise ValueError(f"region must be a non-empty (H, W, 3) crop, got {region.shape}")
        height, width = region.shape[:2]
        rows = _cell_edges(height, self.grid)
        cols = _cell_edges(width, self.grid)

        gray = region.mean(axis=2)
        gy = np.gradient(gray, axis=0) if height > 1 else np.zeros_like(gray)
        gx = np.gradient(gray, axis=1) if width > 1 else np.zeros_like(gray)
        magnitude = np.hypot(gx, gy)
        angle = np.mod(np.arctan2(gy, gx), 2.0 * np.pi)
        bin_idx = np.minimum((angle / (2.0 * np.pi) * self.bins).astype(int), self.bins - 1)
        votes = np.zeros((height, width, self.bins))
        np.put_along_axis(votes, bin_idx[..., None], magnitude[..., None], axis=2)

        def cell_sum(arr: np.ndarray) -> np.ndarray:
            return np.add.reduceat(np.add.reduceat(arr, rows, axis=0), cols, axis=1)

        counts = cell_sum(np.ones((height, width, 1)))
        means = cell_sum(region) / counts / 255.0
        hist = cell_sum(votes) / counts / 255.0
        return np.concatenate([means, hist], axis=2).reshape(-1)


def make_extractor(cfg: ExtractorConfig) -> FeatureExtractor:
    if cfg.kind == "grid_histogram":
        return GridHistogramExtractor(grid=cfg.grid, bins=cfg.bins)
    raise ValueError(f"unknown extractor kind: {cfg.kind}")


def extract_features(region: np.ndarray, extractor: FeatureExtractor) -> np.ndarray:
    feat = np.asarray(extractor(region), dtype=np.float64)
    if feat.shape != (extractor.dim,):
        raise ValueError(f"extractor produced shape {feat.shape}, expected ({extractor.dim},)")
    return feat


def context_sequence(
    image: np.ndarray,
    left: BoundingBox,
    right: BoundingBox,
    extractor: FeatureExtractor,
) -> ContextSequence:
    crops = build_context_regions(left, right, image)
    return ContextSequence(np.stack([extract_features(c, extractor) for c in crops]))


@dataclass(frozen=True)
class VideoFeatures:
    context_seq: np.ndarray  # (n, 7, dim)
    flow_context_seq: np.ndarray  # (n - 1, 7, dim)
    flow_feats: np.ndarray  # (n - 1, dim)


def featurize_video(
    frames: Sequence[np.ndarray],
    boxes: Sequence[tuple[BoundingBox, BoundingBox]],
    extractor: FeatureExtractor,
    cfg: ExtractorConfig,
    flows: Sequence[np.ndarray] | None = None,
) -> VideoFeatures:
    """
    Frames and per-frame actor boxes -> context sequences of every frame and every
    flow image. Flow image t is built from the flow between frames t and t+1 and is
    cropped with frame t's boxes.
    """
    n = len(frames)
    if n < 2:
        raise ValueError(f"a video needs at least 2 frames, got {n}")
    if len(boxes) != n:
        raise ValueError(f"{len(boxes)} box pairs for {n} frames")

    if cfg.flow_source == "stored":
        if flows is None or len(flows) != n - 1:
            raise ValueError("stored flow requested but the video has no matching flow fields")
        fields = list(flows)
    else:
        fields = [
            block_matching_flow(frames[t], frames[t + 1], cfg.block, cfg.search)
            for t in range(n - 1)
        ]

    ctx = [context_sequence(frames[t], *boxes[t], extractor).regions for t in range(n)]
    flow_ctx = [
        context_sequence(encode_flow(fields[t]), *boxes[t], extractor).regions
        for t in range(n - 1)
    ]
    flow_ctx_arr = np.stack(flow_ctx)
    return VideoFeatures(
        context_seq=np.stack(ctx),
        flow_context_seq=flow_ctx_arr,
        flow_feats=flow_ctx_arr[:, 0, :].copy(),
    )
