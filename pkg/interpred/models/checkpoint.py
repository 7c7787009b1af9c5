from __future__ import annotations

from pathlib import Path
import logging

import numpy as np

from interpred.data.io import read_json, write_json
from interpred.models.classifiers import (
    Classifier,
    SpatialModel,
    StructuralModel,
    TemporalConvParams,
    TemporalModel,
)
from interpred.models.head import ClassifierHead
from interpred.models.lstm import LstmParams

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1


class CheckpointError(ValueError):
    pass


def save_checkpoint(model: Classifier, path: Path, config_hash: str | None = None) -> None:
    payload = {
        "format_version": FORMAT_VERSION,
        "arch": model.arch(),
        "config_hash": config_hash,
        "params": {
            name: {"shape": list(arr.shape), "data": arr.reshape(-1).tolist()}
            for name, arr in model.params().items()
        },
    }
    write_json(payload, path)
    logger.info("saved %s checkpoint to %s", model.kind, path)


def build_model(arch: dict) -> Classifier:
    """Zero-initialised model of the declared architecture."""
    kind = arch["kind"]
    dim, m, hidden = arch["input_dim"], arch["num_classes"], arch["head_hidden"]
    if kind == "spatial":
        return SpatialModel(head=ClassifierHead.zeros(dim, hidden, m))
    if kind == "temporal":
        return TemporalModel(
            conv=TemporalConvParams(kernel=np.zeros((arch["k"], dim))),
            head=ClassifierHead.zeros(dim, hidden, m),
        )
    if kind in ("spatial_structural", "temporal_structural"):
        d = arch["lstm_units"]
        return StructuralModel(
            lstm=LstmParams.zeros(dim, d),
            head=ClassifierHead.zeros(d, hidden, m),
            kind=kind,
        )
    raise CheckpointError(f"unknown model kind '{kind}'")


def load_checkpoint(path: Path, expected_arch: dict | None = None) -> Classifier:
    payload = read_json(path)
    if payload.get("format_version") != FORMAT_VERSION:
        raise CheckpointError(
            f"{path}: unsupported checkpoint version {payload.get('format_version')}"
        )
    arch = payload["arch"]
    if expected_arch is not None:
        diff = {k: (arch.get(k), v) for k, v in expected_arch.items() if arch.get(k) != v}
        if diff:
            raise CheckpointError(f"{path}: architecture mismatch (stored, expected): {diff}")
    model = build_model(arch)
    params = model.params()
    stored = payload["params"]
    if set(stored) != set(params):
        raise CheckpointError(
            f"{path}: parameter names {sorted(stored)} do not match {sorted(params)}"
        )
    for name, arr in params.items():
        entry = stored[name]
        if tuple(entry["shape"]) != arr.shape:
            raise CheckpointError(
                f"{path}: {name} has shape {entry['shape']}, architecture needs {list(arr.shape)}"
            )
        data = np.asarray(entry["data"], dtype=np.float64)
        if data.size != arr.size or not np.all(np.isfinite(data)):
            raise CheckpointError(f"{path}: {name} data is malformed")
        arr[...] = data.reshape(arr.shape)
    return model
