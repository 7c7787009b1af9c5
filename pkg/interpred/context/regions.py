from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from interpred.utils.validation import ensure_finite, ensure_image

REGION_ORDER = (
    "global",
    "left_whole",
    "right_whole",
    "left_upper",
    "left_lower",
    "right_upper",
    "right_lower",
)
NUM_REGIONS = len(REGION_ORDER)


@dataclass(frozen=True)
class BoundingBox:
    """Pixel box, half-open: rows [y_min, y_max), cols [x_min, x_max)."""

    x_min: int
    y_min: int
    x_max: int
    y_max: int

    def __post_init__(self) -> None:
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError(f"degenerate bounding box {self}")

    @classmethod
    def from_sequence(cls, values: Sequence[float]) -> "BoundingBox":
        x0, y0, x1, y1 = (int(round(v)) for v in values)
        return cls(x0, y0, x1, y1)

    def as_list(self) -> list[int]:
        return [self.x_min, self.y_min, self.x_max, self.y_max]

    def union(self, other: "BoundingBox") -> "BoundingBox":
        return BoundingBox(
            min(self.x_min, other.x_min),
            min(self.y_min, other.y_min),
            max(self.x_max, other.x_max),
            max(self.y_max, other.y_max),
        )

    def split_vertical(self) -> tuple["BoundingBox", "BoundingBox"]:
        """Top and bottom halves split at the vertical midpoint."""
        mid = (self.y_min + self.y_max) // 2
        if mid - self.y_min < 2 or self.y_max - mid < 2:
            raise ValueError(f"box {self.as_list()} is too short to split into body halves")
        return (
            BoundingBox(self.x_min, self.y_min, self.x_max, mid),
            BoundingBox(self.x_min, mid, self.x_max, self.y_max),
        )

    def inside(self, width: int, height: int) -> bool:
        return self.x_min >= 0 and self.y_min >= 0 and self.x_max <= width and self.y_max <= height


def check_frame(frame: np.ndarray) -> np.ndarray:
    """Validate an (H, W, 3) image with intensities in [0, 255]."""
    frame = np.asarray(frame)
    ensure_image(frame, 3, "frame")
    return frame


def order_actors(a: BoundingBox, b: BoundingBox) -> tuple[BoundingBox, BoundingBox]:
    """Left actor is the box with the smaller x_min."""
    return (a, b) if a.x_min <= b.x_min else (b, a)


def context_boxes(left: BoundingBox, right: BoundingBox) -> list[BoundingBox]:
    left, right = order_actors(left, right)
    left_up, left_low = left.split_vertical()
    right_up, right_low = right.split_vertical()
    return [left.union(right), left, right, left_up, left_low, right_up, right_low]


def build_context_regions(
    left: BoundingBox,
    right: BoundingBox,
    frame: np.ndarray,
) -> list[np.ndarray]:
    """
    Crop the seven context regions of one frame (or flow image), in order:
      global, left whole, right whole, left upper, left lower, right upper, right lower.
    """
    frame = check_frame(frame)
    height, width = frame.shape[:2]
    for box in (left, right):
        if not box.inside(width, height):
            raise ValueError(f"box {box.as_list()} lies outside a {width}x{height} frame")
    return [
        frame[box.y_min : box.y_max, box.x_min : box.x_max]
        for box in context_boxes(left, right)
    ]


@dataclass(frozen=True)
class ContextSequence:
    """Seven region features of one image in REGION_ORDER."""

    regions: np.ndarray

    def __post_init__(self) -> None:
        regions = np.asarray(self.regions, dtype=np.float64)
        if regions.ndim != 2 or regions.shape[0] != NUM_REGIONS:
            raise ValueError(
                f"context sequence must be ({NUM_REGIONS}, dim), got {regions.shape}"
            )
        ensure_finite(regions, "context sequence")
        object.__setattr__(self, "regions", regions)

    @property
    def dim(self) -> int:
        return int(self.regions.shape[1])

    @property
    def global_feature(self) -> np.ndarray:
        return self.regions[0]
