from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from interpred.numerics.kernels import relu, softmax, softmax_backward
from interpred.numerics.random import Rng, xavier_uniform


@dataclass
class ClassifierHead:
    """FC -> ReLU -> FC -> softmax: y = softmax(W_2 relu(W_1 x + b_1) + b_2)."""

    W_1: np.ndarray  # (d_1, d)
    b_1: np.ndarray  # (d_1,)
    W_2: np.ndarray  # (m, d_1)
    b_2: np.ndarray  # (m,)

    def __post_init__(self) -> None:
        d_1, _ = self.W_1.shape
        m = self.W_2.shape[0]
        if self.b_1.shape != (d_1,) or self.W_2.shape != (m, d_1) or self.b_2.shape != (m,):
            raise ValueError(
                f"inconsistent head shapes: W_1 {self.W_1.shape}, b_1 {self.b_1.shape}, "
                f"W_2 {self.W_2.shape}, b_2 {self.b_2.shape}"
            )

    @property
    def input_dim(self) -> int:
        return int(self.W_1.shape[1])

    @property
    def hidden(self) -> int:
        return int(self.W_1.shape[0])

    @property
    def num_classes(self) -> int:
        return int(self.W_2.shape[0])

    @classmethod
    def zeros(cls, input_dim: int, hidden: int, m: int) -> "ClassifierHead":
        return cls(
            W_1=np.zeros((hidden, input_dim)),
            b_1=np.zeros(hidden),
            W_2=np.zeros((m, hidden)),
            b_2=np.zeros(m),
        )

    @classmethod
    def init(cls, rng: Rng, input_dim: int, hidden: int, m: int) -> "ClassifierHead":
        head = cls.zeros(input_dim, hidden, m)
        head.W_1 = xavier_uniform(rng, hidden, input_dim)
        head.W_2 = xavier_uniform(rng, m, hidden)
        return head

    def arrays(self) -> dict[str, np.ndarray]:
        return {"W_1": self.W_1, "b_1": self.b_1, "W_2": self.W_2, "b_2": self.b_2}

    def forward(self, x: np.ndarray) -> tuple[np.ndarray, tuple]:
        """x is (..., d); returns probabilities (..., m) and a cache for backward."""
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.input_dim:
            raise ValueError(f"head input has dim {x.shape[-1]}, expected {self.input_dim}")
        a1 = x @ self.W_1.T + self.b_1
        r = relu(a1)
        y = softmax(r @ self.W_2.T + self.b_2)
        return y, (x, a1, r, y)

    def backward(self, cache: tuple, dy: np.ndarray) -> tuple[dict[str, np.ndarray], np.ndarray]:
        """dy = dL/dy over (..., m). Returns parameter gradients and dL/dx."""
        y = cache[3]
        return self.backward_logits(cache, softmax_backward(y, dy))

    def backward_logits(self, cache: tuple, dz: np.ndarray) -> tuple[dict[str, np.ndarray], np.ndarray]:
        x, a1, r, _ = cache
        x2 = x.reshape(-1, x.shape[-1])
        r2 = r.reshape(-1, r.shape[-1])
        dz2 = dz.reshape(-1, dz.shape[-1])
        dr = dz2 @ self.W_2
        da1 = dr * (a1.reshape(-1, a1.shape[-1]) > 0)
        grads = {
            "W_2": dz2.T @ r2,
            "b_2": dz2.sum(axis=0),
            "W_1": da1.T @ x2,
            "b_1": da1.sum(axis=0),
        }
        dx = (da1 @ self.W_1).reshape(x.shape)
        return grads, dx


def head_scores(head: ClassifierHead, o_t: np.ndarray) -> np.ndarray:
    """Class probability vector for one LSTM output (or any head input)."""
    y, _ = head.forward(o_t)
    return y
