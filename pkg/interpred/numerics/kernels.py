from __future__ import annotations

import numpy as np


def sigmoid(x):
    """Logistic function, evaluated without overflow for large |x|."""
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out if out.ndim else float(out)


def relu(x):
    x = np.asarray(x, dtype=np.float64)
    out = np.maximum(x, 0.0)
    return out if out.ndim else float(out)


def softmax(z, axis: int = -1) -> np.ndarray:
    """
    Softmax along `axis` with max-subtraction.
    Accepts a single vector or a batch of row vectors.
    """
    z = np.asarray(z, dtype=np.float64)
    if z.size == 0 or z.shape[axis] == 0:
        raise ValueError("softmax of an empty vector")
    shifted = z - np.max(z, axis=axis, keepdims=True)
    ez = np.exp(shifted)
    return ez / np.sum(ez, axis=axis, keepdims=True)


def softmax_backward(y: np.ndarray, dy: np.ndarray) -> np.ndarray:
    """Gradient w.r.t. the logits given softmax output y and upstream dy (row-wise)."""
    return y * (dy - np.sum(dy * y, axis=-1, keepdims=True))


def cross_entropy(probs: np.ndarray, labels: np.ndarray) -> float:
    """Mean negative log-likelihood of integer labels (0-based) under row-wise probs."""
    picked = probs[np.arange(len(labels)), labels]
    return float(-np.mean(np.log(np.maximum(picked, 1e-300))))


def one_hot(labels: np.ndarray, m: int) -> np.ndarray:
    out = np.zeros((len(labels), m))
    out[np.arange(len(labels)), labels] = 1.0
    return out
