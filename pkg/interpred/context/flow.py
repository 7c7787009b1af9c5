from __future__ import annotations

import logging

import numpy as np

from interpred.utils.validation import ensure_finite, ensure_image

logger = logging.getLogger(__name__)

MID_SCALE = 128.0


def check_flow(flow: np.ndarray) -> np.ndarray:
    flow = np.asarray(flow, dtype=np.float64)
    ensure_image(flow, 2, "flow field")
    ensure_finite(flow, "flow field")
    return flow


def encode_flow(flow: np.ndarray) -> np.ndarray:
    """
    Flow field (H, W, 2) -> flow image (H, W, 3).
    Each component is min-max mapped to [0, 255] per image; a constant component maps
    to 128. The third channel is 0.
    """
    flow = check_flow(flow)
    image = np.zeros(flow.shape[:2] + (3,), dtype=np.float64)
    for c in range(2):
        comp = flow[..., c]
        lo, hi = comp.min(), comp.max()
        if hi > lo:
            image[..., c] = (comp - lo) * (255.0 / (hi - lo))
        else:
            image[..., c] = MID_SCALE
    return image


def _candidate_displacements(search: int) -> list[tuple[int, int]]:
    # tie-break order: smaller magnitude, then smaller dx, then smaller dy
    cands = [(dx, dy) for dx in range(-search, search + 1) for dy in range(-search, search + 1)]
    return sorted(cands, key=lambda d: (d[0] ** 2 + d[1] ** 2, d[0], d[1]))


def block_matching_flow(
    frame_a: np.ndarray,
    frame_b: np.ndarray,
    block: int = 8,
    search: int = 3,
) -> np.ndarray:
    """
    Exhaustive block matching with a sum-of-absolute-differences cost.

    For each block of frame_a, finds the integer displacement (dx, dy) with
    |dx|, |dy| <= search such that frame_b[y + dy, x + dx] best matches
    frame_a[y, x]; the block's displacement is broadcast to its pixels.
    Pixels shifted outside frame_b are compared against edge-replicated values.
    """
    a = np.asarray(frame_a, dtype=np.float64)
    b = np.asarray(frame_b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"frame sizes differ: {a.shape} vs {b.shape}")
    if block < 4:
        raise ValueError(f"block must be >= 4, got {block}")
    if search < 1:
        raise ValueError(f"search must be >= 1, got {search}")
    if a.ndim == 3:
        a = a.mean(axis=2)
        b = b.mean(axis=2)

    height, width = a.shape
    rows = np.arange(0, height, block)
    cols = np.arange(0, width, block)
    padded = np.pad(b, search, mode="edge")

    best_cost = np.full((len(rows), len(cols)), np.inf)
    best = np.zeros((len(rows), len(cols), 2))
    for dx, dy in _candidate_displacements(search):
        shifted = padded[search + dy : search + dy + height, search + dx : search + dx + width]
        sad = np.abs(shifted - a)
        cost = np.add.reduceat(np.add.reduceat(sad, rows, axis=0), cols, axis=1)
        better = cost < best_cost
        best_cost[better] = cost[better]
        best[better] = (dx, dy)

    flow = np.repeat(np.repeat(best, block, axis=0), block, axis=1)
    return flow[:height, :width]
