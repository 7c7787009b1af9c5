from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence
import logging

import numpy as np

from interpred.data.io import read_json, write_json
from interpred.models.classifiers import MODEL_ORDER

logger = logging.getLogger(__name__)

NUM_MODELS = len(MODEL_ORDER)


class FusionError(RuntimeError):
    pass


def check_score_matrix(S: np.ndarray, tol: float = 1e-6) -> np.ndarray:
    """(4, m) matrix, rows in MODEL_ORDER, each row a probability vector."""
    S = np.asarray(S, dtype=np.float64)
    if S.ndim != 2 or S.shape[0] != NUM_MODELS:
        raise ValueError(f"score matrix must be ({NUM_MODELS}, m), got {S.shape}")
    if np.any(S < -tol) or np.any(S > 1 + tol):
        raise ValueError("score matrix entries must lie in [0, 1]")
    if not np.allclose(S.sum(axis=1), 1.0, atol=tol):
        raise ValueError("score matrix rows must sum to 1")
    return S


@dataclass(frozen=True)
class RankPairs:
    """Stacked difference vectors x (N, 4) with labels y (N,) in {+1, -1}."""

    x: np.ndarray
    y: np.ndarray

    def __len__(self) -> int:
        return int(len(self.y))

    def restrict(self, active: Sequence[int]) -> "RankPairs":
        return RankPairs(x=self.x[:, list(active)], y=self.y)


@dataclass(frozen=True)
class FusionWeights:
    w: np.ndarray
    C: float = 1.0
    iterations: int = 0

    def __post_init__(self) -> None:
        w = np.asarray(self.w, dtype=np.float64)
        if w.shape != (NUM_MODELS,):
            raise ValueError(f"fusion weights must have {NUM_MODELS} entries, got {w.shape}")
        if np.any(w < 0) or not np.any(w > 0):
            raise ValueError(f"fusion weights must be non-negative and not all zero: {w}")
        object.__setattr__(self, "w", w)

    @classmethod
    def uniform(cls) -> "FusionWeights":
        return cls(np.full(NUM_MODELS, 1.0 / NUM_MODELS))

    @classmethod
    def selector(cls, name: str) -> "FusionWeights":
        w = np.zeros(NUM_MODELS)
        w[MODEL_ORDER.index(name)] = 1.0
        return cls(w)

    def as_dict(self) -> dict:
        return {
            "row_order": list(MODEL_ORDER),
            "w": self.w.tolist(),
            "C": self.C,
            "iterations": self.iterations,
        }


def build_pairs(matrices: Iterable[tuple[np.ndarray, int]]) -> RankPairs:
    """
    For each (S, l) with 1-based true label l, emit (s_l - s_j, +1) and the mirrored
    (s_j - s_l, -1) for every column j != l.
    """
    xs: list[np.ndarray] = []
    ys: list[np.ndarray] = []
    for S, label in matrices:
        S = check_score_matrix(S)
        m = S.shape[1]
        if not (1 <= label <= m):
            raise ValueError(f"label {label} is outside [1, {m}]")
        true_col = S[:, label - 1]
        others = np.delete(S, label - 1, axis=1).T  # (m - 1, 4)
        diff = true_col[None, :] - others
        xs.extend([diff, -diff])
        ys.extend([np.ones(m - 1), -np.ones(m - 1)])
    if not xs:
        return RankPairs(x=np.zeros((0, NUM_MODELS)), y=np.zeros(0))
    return RankPairs(x=np.concatenate(xs), y=np.concatenate(ys))


def ranking_objective(w: np.ndarray, pairs: RankPairs, C: float) -> float:
    """||w||^2 + C * sum_i max(0, 1 - y_i w.x_i)."""
    margins = pairs.y * (pairs.x @ w)
    return float(w @ w + C * np.sum(np.maximum(0.0, 1.0 - margins)))


def train_ranker(pairs: RankPairs, C: float = 1.0, iterations: int = 10_000) -> np.ndarray:
    """
    Unconstrained soft-margin ranking weights by full-batch subgradient descent
    from w = 0 with step 1 / (2 t) (the objective is 2-strongly convex). Returns the
    iterate with the lowest objective seen.
    """
    if len(pairs) == 0:
        raise ValueError("train_ranker needs at least one pair")
    if not C > 0:
        raise ValueError(f"C must be > 0, got {C}")
    yx = pairs.y[:, None] * pairs.x
    w = np.zeros(pairs.x.shape[1])
    best_w, best_obj = w.copy(), ranking_objective(w, pairs, C)
    for t in range(1, iterations + 1):
        active = yx @ w < 1.0
        subgrad = 2.0 * w - C * yx[active].sum(axis=0)
        w = w - subgrad / (2.0 * t)
        obj = ranking_objective(w, pairs, C)
        if obj < best_obj:
            best_w, best_obj = w.copy(), obj
        if t % 2000 == 0:
            logger.debug("ranker iteration %d objective %.6f best %.6f", t, obj, best_obj)
    return best_w


def nonneg_project_retrain(
    pairs: RankPairs,
    C: float = 1.0,
    iterations: int = 10_000,
    active: Sequence[int] | None = None,
) -> FusionWeights:
    """
    Train on the active coordinates, zero and drop the negative ones, and retrain
    until every active weight is non-negative. `active` restricts the initial set
    of models (all four by default).
    """
    active = list(range(NUM_MODELS)) if active is None else sorted(active)
    w_full = np.zeros(NUM_MODELS)
    for rounds in range(1, NUM_MODELS + 1):
        if not active:
            break
        w_active = train_ranker(pairs.restrict(active), C, iterations)
        negative = [coord for coord, val in zip(active, w_active) if val < 0]
        logger.debug("round %d active=%s w=%s", rounds, active, np.round(w_active, 4))
        if not negative:
            w_full[:] = 0.0
            w_full[active] = w_active
            break
        active = [coord for coord in active if coord not in negative]
    if not np.any(w_full > 0):
        raise FusionError("no positively contributing model")
    logger.info(
        "fusion weights %s after %d round(s)",
        dict(zip(MODEL_ORDER, np.round(w_full, 4).tolist())),
        rounds,
    )
    return FusionWeights(w=w_full, C=C, iterations=iterations)


def fuse_scores(S: np.ndarray, weights: FusionWeights | np.ndarray) -> np.ndarray:
    """c_i = sum_p w_p s_{p,i}."""
    w = weights.w if isinstance(weights, FusionWeights) else np.asarray(weights, dtype=np.float64)
    S = np.asarray(S, dtype=np.float64)
    if S.shape[-2] != w.shape[0]:
        raise ValueError(f"score matrix has {S.shape[-2]} rows, weights have {w.shape[0]}")
    return np.einsum("p,...pm->...m", w, S)


def save_weights(weights: FusionWeights, path: Path, config_hash: str | None = None) -> None:
    payload = weights.as_dict()
    if config_hash is not None:
        payload["config_hash"] = config_hash
    write_json(payload, path)


def load_weights(path: Path) -> FusionWeights:
    payload = read_json(path)
    if list(payload.get("row_order", [])) != list(MODEL_ORDER):
        raise ValueError(f"{path}: row_order must be {list(MODEL_ORDER)}")
    return FusionWeights(
        w=np.asarray(payload["w"], dtype=np.float64),
        C=float(payload.get("C", 1.0)),
        iterations=int(payload.get("iterations", 0)),
    )
