from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
import logging

import numpy as np

from interpred.context.regions import BoundingBox
from interpred.data.io import load_image, read_json, save_png, write_json

logger = logging.getLogger(__name__)

FRAME_PATTERNS = ("*.png", "*.pgm", "*.ppm")


@dataclass(frozen=True)
class RawVideo:
    """Frames (n, H, W, 3), per-frame (left, right) actor boxes and optional flow (n-1, H, W, 2)."""

    id: str
    label: int
    group: int
    frames: np.ndarray
    boxes: list[tuple[BoundingBox, BoundingBox]]
    flows: np.ndarray | None = None

    @property
    def n(self) -> int:
        return int(self.frames.shape[0])


def write_video_dir(video: RawVideo, root: Path) -> Path:
    """
    Layout:
      <root>/<id>/meta.json          id, label, group, boxes per frame
      <root>/<id>/frames/frame_0001.png ...
      <root>/<id>/flow.npy           optional ground-truth flow
    """
    vdir = Path(root) / video.id
    for t, frame in enumerate(video.frames, start=1):
        save_png(frame, vdir / "frames" / f"frame_{t:04d}.png")
    if video.flows is not None:
        np.save(vdir / "flow.npy", video.flows)
    write_json(
        {
            "id": video.id,
            "label": video.label,
            "group": video.group,
            "boxes": [[left.as_list(), right.as_list()] for left, right in video.boxes],
        },
        vdir / "meta.json",
    )
    return vdir


def read_video_dir(vdir: Path) -> RawVideo:
    vdir = Path(vdir)
    meta = read_json(vdir / "meta.json")
    paths: list[Path] = []
    for pattern in FRAME_PATTERNS:
        paths.extend((vdir / "frames").glob(pattern))
    paths.sort()
    if not paths:
        raise ValueError(f"no frames found under {vdir / 'frames'}")
    frames = np.stack([load_image(p) for p in paths])
    boxes = [
        (BoundingBox.from_sequence(left), BoundingBox.from_sequence(right))
        for left, right in meta["boxes"]
    ]
    if len(boxes) != len(frames):
        raise ValueError(f"{vdir}: {len(boxes)} box pairs for {len(frames)} frames")
    flow_path = vdir / "flow.npy"
    flows = np.load(flow_path) if flow_path.exists() else None
    return RawVideo(
        id=str(meta["id"]),
        label=int(meta["label"]),
        group=int(meta["group"]),
        frames=frames,
        boxes=boxes,
        flows=flows,
    )


def list_video_dirs(root: Path) -> list[Path]:
    root = Path(root)
    if not root.is_dir():
        raise ValueError(f"video directory does not exist: {root}")
    return sorted(p for p in root.iterdir() if (p / "meta.json").exists())
