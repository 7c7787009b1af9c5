from __future__ import annotations

from typing import Callable, Mapping
import logging

import numpy as np

logger = logging.getLogger(__name__)

LossFn = Callable[[], tuple[float, Mapping[str, np.ndarray]]]


def grad_check(
    loss_fn: LossFn,
    params: Mapping[str, np.ndarray],
    epsilon: float = 1e-5,
) -> float:
    """
    Compare analytic gradients against central differences.

    loss_fn() evaluates the loss at the current contents of `params` and returns
    (loss, grads) with grads keyed like params. Entries of `params` are perturbed
    in place and restored.

    Returns max over entries of |analytic - numeric| / max(1, |analytic| + |numeric|).
    """
    if not (1e-6 <= epsilon <= 1e-3):
        raise ValueError(f"epsilon must be in [1e-6, 1e-3], got {epsilon}")

    loss, grads = loss_fn()
    if not np.isfinite(loss):
        raise FloatingPointError(f"non-finite loss {loss} at the unperturbed point")
    analytic = {name: np.array(grads[name], dtype=np.float64, copy=True) for name in params}

    worst = 0.0
    for name, arr in params.items():
        flat = arr.reshape(-1)
        ana = analytic[name].reshape(-1)
        for idx in range(flat.size):
            orig = flat[idx]
            flat[idx] = orig + epsilon
            plus, _ = loss_fn()
            flat[idx] = orig - epsilon
            minus, _ = loss_fn()
            flat[idx] = orig
            if not (np.isfinite(plus) and np.isfinite(minus)):
                raise FloatingPointError(f"non-finite loss perturbing {name}[{idx}]")
            numeric = (plus - minus) / (2.0 * epsilon)
            err = abs(ana[idx] - numeric) / max(1.0, abs(ana[idx]) + abs(numeric))
            if err > worst:
                worst = err
                logger.debug("grad_check worst so far: %s[%d] err=%.3e", name, idx, err)
    return float(worst)
