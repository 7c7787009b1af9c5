from __future__ import annotations

from dataclasses import dataclass
import logging
import warnings

import numpy as np

from interpred.models.classifiers import Classifier
from interpred.numerics.random import make_rng

logger = logging.getLogger(__name__)


class TrainingDivergedError(RuntimeError):
    def __init__(self, kind: str, epoch: int, batch: int, loss: float) -> None:
        super().__init__(
            f"{kind} model produced non-finite loss {loss} at epoch {epoch}, batch {batch}"
        )
        self.epoch = epoch
        self.batch = batch
        self.loss = loss


@dataclass(frozen=True)
class TrainParams:
    learning_rate: float = 0.05
    epochs: int = 30
    batch_size: int = 32
    seed: int = 0
    clip_norm: float = 5.0

    def __post_init__(self) -> None:
        if not self.learning_rate > 0:
            raise ValueError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")
        if not self.clip_norm > 0:
            raise ValueError(f"clip_norm must be > 0, got {self.clip_norm}")


def clip_gradients(grads: dict[str, np.ndarray], max_norm: float) -> float:
    """Scale all gradients in place so their joint L2 norm is at most max_norm; returns the original norm."""
    total = float(np.sqrt(sum(float(np.sum(g * g)) for g in grads.values())))
    if total > max_norm:
        scale = max_norm / total
        for g in grads.values():
            g *= scale
    return total


def train_model(
    model: Classifier,
    inputs: np.ndarray,
    labels: np.ndarray,
    hp: TrainParams,
) -> tuple[Classifier, list[float]]:
    """
    Mini-batch gradient descent on mean cross-entropy with gradient-norm clipping.
    labels are 1-based class ids. The model is updated in place and returned with
    the per-epoch mean batch loss.
    """
    inputs = np.asarray(inputs, dtype=np.float64)
    labels0 = np.asarray(labels, dtype=int) - 1
    if len(inputs) != len(labels0) or len(inputs) == 0:
        raise ValueError(f"{len(inputs)} inputs for {len(labels0)} labels")
    m = model.num_classes
    if labels0.min() < 0 or labels0.max() >= m:
        raise ValueError(f"labels must lie in [1, {m}]")
    missing = sorted(set(range(m)) - set(labels0.tolist()))
    if missing:
        warnings.warn(
            f"{model.kind}: no training examples for classes {[c + 1 for c in missing]}",
            stacklevel=2,
        )

    rng = make_rng(hp.seed)
    params = model.params()
    n = len(inputs)
    trace: list[float] = []
    for epoch in range(hp.epochs):
        order = rng.permutation(n)
        batch_losses = []
        for b, start in enumerate(range(0, n, hp.batch_size)):
            idx = order[start : start + hp.batch_size]
            loss, grads = model.loss_and_grads(inputs[idx], labels0[idx])
            if not np.isfinite(loss):
                raise TrainingDivergedError(model.kind, epoch, b, loss)
            clip_gradients(grads, hp.clip_norm)
            for name, arr in params.items():
                arr -= hp.learning_rate * grads[name]
            batch_losses.append(loss)
        trace.append(float(np.mean(batch_losses)))
        if epoch == 0 or (epoch + 1) % 10 == 0 or epoch + 1 == hp.epochs:
            logger.info("%s epoch %d/%d loss %.4f", model.kind, epoch + 1, hp.epochs, trace[-1])
    return model, trace
