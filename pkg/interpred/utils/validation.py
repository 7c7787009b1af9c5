from __future__ import annotations

import numpy as np


def ensure_finite(arr: np.ndarray, name: str) -> None:
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")


def ensure_image(arr: np.ndarray, channels: int, name: str) -> None:
    if arr.ndim != 3 or arr.shape[2] != channels:
        raise ValueError(f"{name} must have shape (H, W, {channels}), got {arr.shape}")
