from __future__ import annotations

from dataclasses import dataclass
import logging
import math

import numpy as np

from interpred.context.regions import BoundingBox
from interpred.data.videos import RawVideo
from interpred.numerics.random import Rng, make_rng, spawn

logger = logging.getLogger(__name__)

# Class ids are 1-based positions in this tuple; the first m scripts are used.
CLASS_SCRIPTS = (
    "approach",
    "depart",
    "left_upper",
    "left_lower",
    "right_upper",
    "joint_oscillation",
    "contact",
    "push_back",
)
MAX_CLASSES = len(CLASS_SCRIPTS)

LIMB = 4  # limb block side, pixels
MIN_GAP = 2


@dataclass
class _Actor:
    x: float
    y: int
    width: int
    height: int
    upper: np.ndarray
    lower: np.ndarray
    limb: np.ndarray

    def box(self, frame_w: int) -> BoundingBox:
        x0 = int(min(max(round(self.x), 0), frame_w - self.width))
        return BoundingBox(x0, self.y, x0 + self.width, self.y + self.height)


@dataclass(frozen=True)
class _Jitter:
    speed: float
    amplitude: float
    period: float
    phase: float


def _texture(rng: Rng, width: int, height: int) -> np.ndarray:
    coarse = rng.integers(40, 90, size=(height // 4 + 1, width // 4 + 1, 3))
    tex = np.repeat(np.repeat(coarse, 4, axis=0), 4, axis=1)[:height, :width]
    return (tex + rng.integers(-8, 9, size=(height, width, 3))).astype(np.float64)


def _color(rng: Rng, base: tuple[int, int, int]) -> np.ndarray:
    return np.clip(np.asarray(base) + rng.integers(-20, 21, size=3), 0, 255).astype(np.float64)


def _oscillation(j: _Jitter, t: int) -> int:
    return int(round(j.amplitude * math.sin(2.0 * math.pi * t / j.period + j.phase)))


def _positions(script: str, left: _Actor, right: _Actor, n: int, j: _Jitter, width: int):
    """Per-frame x of both actors and vertical limb offsets (left arm, left leg, right arm)."""
    lx, rx = [left.x], [right.x]
    for t in range(1, n):
        a, b = lx[-1], rx[-1]
        gap = b - (a + left.width)
        if script == "approach":
            step = min(j.speed, max(gap - MIN_GAP, 0.0) / 2.0)
            a, b = a + step, b - step
        elif script == "depart":
            a, b = max(a - j.speed, 0.0), min(b + j.speed, float(width - right.width))
        elif script == "contact" and t >= n // 2:
            a += min(1.8 * j.speed, max(gap - MIN_GAP, 0.0))
        elif script == "push_back":
            if gap > 3 * MIN_GAP:
                a += min(j.speed, gap - 3 * MIN_GAP)
            else:
                b = min(b + 1.5 * j.speed, float(width - right.width))
        lx.append(a)
        rx.append(b)

    zeros = [0] * n
    osc = [_oscillation(j, t) for t in range(n)]
    left_arm = osc if script in ("left_upper", "joint_oscillation") else zeros
    left_leg = osc if script == "left_lower" else zeros
    right_arm = osc if script in ("right_upper", "joint_oscillation") else zeros
    return lx, rx, left_arm, left_leg, right_arm


def _limb_origin(box: BoundingBox, upper: bool, offset: int) -> tuple[int, int]:
    half = (box.y_max - box.y_min) // 2
    top = box.y_min if upper else box.y_min + half
    y = top + (half - LIMB) // 2 + offset
    x = box.x_min + (box.x_max - box.x_min - LIMB) // 2
    return x, y


def _paint(frame: np.ndarray, flow: np.ndarray | None, x: int, y: int, w: int, h: int, color, motion) -> None:
    frame[y : y + h, x : x + w] = color
    if flow is not None:
        flow[y : y + h, x : x + w] = motion


def _render_video(
    script: str, n: int, width: int, height: int, rng: Rng
) -> tuple[np.ndarray, list[tuple[BoundingBox, BoundingBox]], np.ndarray]:
    background = _texture(rng, width, height)
    bw = int(rng.integers(11, 14))
    bh = int(rng.integers(34, 39))
    y0 = int(np.clip((height - bh) // 2 + rng.integers(-3, 4), 0, height - bh))
    if script == "depart":
        center = width / 2 + rng.uniform(-3, 3)
        start_left = center - MIN_GAP - 2 - bw
        start_right = center + MIN_GAP + 2
    else:
        start_left = 6 + rng.uniform(0, 6)
        start_right = width - 6 - bw - rng.uniform(0, 6)
    left = _Actor(
        start_left, y0, bw, bh,
        _color(rng, (200, 70, 60)), _color(rng, (140, 50, 40)), _color(rng, (240, 220, 80)),
    )
    right = _Actor(
        start_right, y0, bw, bh,
        _color(rng, (60, 80, 200)), _color(rng, (40, 50, 140)), _color(rng, (90, 230, 230)),
    )
    jitter = _Jitter(
        speed=float(rng.uniform(1.2, 1.8)),
        amplitude=float(rng.uniform(2.5, 3.5)),
        period=float(rng.uniform(7.0, 9.0)),
        phase=float(rng.uniform(0, 2 * math.pi)),
    )
    lx, rx, left_arm, left_leg, right_arm = _positions(script, left, right, n, jitter, width)

    frames = np.empty((n, height, width, 3))
    flows = np.zeros((n - 1, height, width, 2))
    boxes = []
    for t in range(n):
        left.x, right.x = lx[t], rx[t]
        lb, rb = left.box(width), right.box(width)
        boxes.append((lb, rb))
        frames[t] = background
    for t in range(n):
        frame = frames[t]
        flow = flows[t] if t < n - 1 else None
        nxt = min(t + 1, n - 1)
        for actor, idx in ((left, 0), (right, 1)):
            box, box_next = boxes[t][idx], boxes[nxt][idx]
            dx = box_next.x_min - box.x_min
            half = bh // 2
            _paint(frame, flow, box.x_min, box.y_min, bw, half, actor.upper, (dx, 0))
            _paint(frame, flow, box.x_min, box.y_min + half, bw, bh - half, actor.lower, (dx, 0))
        limbs = (
            (0, True, left_arm, left.limb),
            (0, False, left_leg, left.limb),
            (1, True, right_arm, right.limb),
            (1, False, [0] * n, right.limb),
        )
        for idx, upper, offsets, color in limbs:
            box, box_next = boxes[t][idx], boxes[nxt][idx]
            x, y = _limb_origin(box, upper, offsets[t])
            x_next, y_next = _limb_origin(box_next, upper, offsets[nxt])
            _paint(frame, flow, x, y, LIMB, LIMB, color, (x_next - x, y_next - y))
    return frames, boxes, flows


def generate_synthetic(
    num_classes: int,
    videos_per_class: int,
    frames_per_video: int,
    seed: int,
    groups: int = 4,
    width: int = 96,
    height: int = 64,
) -> list[RawVideo]:
    """
    Two rectangular actors on a textured background acting out class-specific
    motion scripts (CLASS_SCRIPTS) with seeded jitter. Returns frames, actor boxes,
    exact flow fields, labels (1-based) and groups (video index mod `groups`).
    """
    if not (1 <= num_classes <= MAX_CLASSES):
        raise ValueError(f"num_classes must be in [1, {MAX_CLASSES}], got {num_classes}")
    if videos_per_class < 1 or groups < 1:
        raise ValueError("videos_per_class and groups must be >= 1")
    if frames_per_video < 2:
        raise ValueError(f"frames_per_video must be >= 2, got {frames_per_video}")

    rngs = spawn(make_rng(seed), num_classes * videos_per_class)
    videos = []
    for label in range(1, num_classes + 1):
        script = CLASS_SCRIPTS[label - 1]
        for j in range(videos_per_class):
            rng = rngs[(label - 1) * videos_per_class + j]
            frames, boxes, flows = _render_video(script, frames_per_video, width, height, rng)
            videos.append(
                RawVideo(
                    id=f"c{label}_v{j:03d}",
                    label=label,
                    group=j % groups,
                    frames=frames,
                    boxes=boxes,
                    flows=flows,
                )
            )
    logger.info(
        "generated %d synthetic videos (%d classes, %d frames each)",
        len(videos), num_classes, frames_per_video,
    )
    return videos
