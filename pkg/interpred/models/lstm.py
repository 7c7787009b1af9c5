from __future__ import annotations

from dataclasses import dataclass, field
import logging

import numpy as np

from interpred.numerics.kernels import sigmoid
from interpred.numerics.random import Rng, xavier_uniform

logger = logging.getLogger(__name__)

GATES = ("f", "c", "i", "o")


@dataclass
class LstmParams:
    """
    Single-layer LSTM with a peephole from the new cell state into the output gate:

      f_t  = sigmoid(W_f x_t + U_f h_{t-1} + b_f)
      C~_t = tanh(W_c x_t + U_c h_{t-1} + b_c)
      i_t  = sigmoid(W_i x_t + U_i h_{t-1} + b_i)
      C_t  = i_t * C~_t + f_t * C_{t-1}
      o_t  = sigmoid(W_o x_t + U_o h_{t-1} + V_o C_t + b_o)
      h_t  = o_t * tanh(C_t)

    W_* are (d, input_dim), U_* and V_o are (d, d), biases are (d,).
    """

    W_f: np.ndarray
    U_f: np.ndarray
    b_f: np.ndarray
    W_c: np.ndarray
    U_c: np.ndarray
    b_c: np.ndarray
    W_i: np.ndarray
    U_i: np.ndarray
    b_i: np.ndarray
    W_o: np.ndarray
    U_o: np.ndarray
    V_o: np.ndarray
    b_o: np.ndarray

    def __post_init__(self) -> None:
        d, n_in = self.W_f.shape
        for g in GATES:
            if getattr(self, f"W_{g}").shape != (d, n_in):
                raise ValueError(f"W_{g} must be ({d}, {n_in})")
            if getattr(self, f"U_{g}").shape != (d, d):
                raise ValueError(f"U_{g} must be ({d}, {d})")
            if getattr(self, f"b_{g}").shape != (d,):
                raise ValueError(f"b_{g} must be ({d},)")
        if self.V_o.shape != (d, d):
            raise ValueError(f"V_o must be ({d}, {d})")

    @property
    def d(self) -> int:
        return int(self.W_f.shape[0])

    @property
    def input_dim(self) -> int:
        return int(self.W_f.shape[1])

    @classmethod
    def zeros(cls, input_dim: int, d: int) -> "LstmParams":
        arrays = {}
        for g in GATES:
            arrays[f"W_{g}"] = np.zeros((d, input_dim))
            arrays[f"U_{g}"] = np.zeros((d, d))
            arrays[f"b_{g}"] = np.zeros(d)
        arrays["V_o"] = np.zeros((d, d))
        return cls(**arrays)

    @classmethod
    def init(cls, rng: Rng, input_dim: int, d: int) -> "LstmParams":
        """Xavier-uniform weights, zero biases."""
        p = cls.zeros(input_dim, d)
        for g in GATES:
            setattr(p, f"W_{g}", xavier_uniform(rng, d, input_dim))
            setattr(p, f"U_{g}", xavier_uniform(rng, d, d))
        p.V_o = xavier_uniform(rng, d, d)
        return p

    def arrays(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in self.__dataclass_fields__}


@dataclass
class LstmState:
    C: np.ndarray
    h: np.ndarray

    @classmethod
    def zeros(cls, d: int, batch: int | None = None) -> "LstmState":
        shape = (d,) if batch is None else (batch, d)
        return cls(C=np.zeros(shape), h=np.zeros(shape))


def lstm_step(
    p: LstmParams,
    x_t: np.ndarray,
    prev: LstmState,
) -> tuple[LstmState, np.ndarray]:
    """
    One LSTM update. x_t is (input_dim,) or (batch, input_dim).
    Returns the new state and the output value o_t.
    """
    state, output, _ = _step(p, np.asarray(x_t, dtype=np.float64), prev)
    return state, output


def _step(p: LstmParams, x: np.ndarray, prev: LstmState):
    if x.shape[-1] != p.input_dim:
        raise ValueError(f"x_t has dim {x.shape[-1]}, LSTM expects {p.input_dim}")
    if prev.h.shape[-1] != p.d or prev.C.shape[-1] != p.d:
        raise ValueError(f"state dim must be {p.d}")
    h_prev, c_prev = prev.h, prev.C
    f = sigmoid(x @ p.W_f.T + h_prev @ p.U_f.T + p.b_f)
    g = np.tanh(x @ p.W_c.T + h_prev @ p.U_c.T + p.b_c)
    i = sigmoid(x @ p.W_i.T + h_prev @ p.U_i.T + p.b_i)
    c = i * g + f * c_prev
    o = sigmoid(x @ p.W_o.T + h_prev @ p.U_o.T + c @ p.V_o.T + p.b_o)
    tc = np.tanh(c)
    h = o * tc
    cache = (x, h_prev, c_prev, f, g, i, c, o, tc)
    return LstmState(C=c, h=h), o, cache


@dataclass
class LstmTrace:
    """Forward record of a batch sequence, consumed by lstm_backward."""

    outputs: np.ndarray  # (batch, T, d) o_t values
    caches: list = field(default_factory=list)


def lstm_forward(p: LstmParams, xs: np.ndarray) -> LstmTrace:
    """Run the LSTM over xs (batch, T, input_dim) from the zero state."""
    xs = np.asarray(xs, dtype=np.float64)
    if xs.ndim != 3:
        raise ValueError(f"expected (batch, T, input_dim), got {xs.shape}")
    batch, steps, _ = xs.shape
    state = LstmState.zeros(p.d, batch)
    outputs = np.empty((batch, steps, p.d))
    caches = []
    for t in range(steps):
        state, o, cache = _step(p, xs[:, t, :], state)
        outputs[:, t, :] = o
        caches.append(cache)
    return LstmTrace(outputs=outputs, caches=caches)


def lstm_backward(p: LstmParams, trace: LstmTrace, d_outputs: np.ndarray) -> dict[str, np.ndarray]:
    """
    Backpropagation through time. d_outputs is dL/do_t, shape (batch, T, d).
    Returns gradients keyed like LstmParams.arrays().
    """
    grads = {name: np.zeros_like(arr) for name, arr in p.arrays().items()}
    batch = d_outputs.shape[0]
    dh_next = np.zeros((batch, p.d))
    dc_next = np.zeros((batch, p.d))
    for t in reversed(range(len(trace.caches))):
        x, h_prev, c_prev, f, g, i, c, o, tc = trace.caches[t]
        do = d_outputs[:, t, :] + dh_next * tc
        da_o = do * o * (1.0 - o)
        dc = dc_next + dh_next * o * (1.0 - tc**2) + da_o @ p.V_o

        da_f = dc * c_prev * f * (1.0 - f)
        da_c = dc * i * (1.0 - g**2)
        da_i = dc * g * i * (1.0 - i)

        for gate, da in (("f", da_f), ("c", da_c), ("i", da_i), ("o", da_o)):
            grads[f"W_{gate}"] += da.T @ x
            grads[f"U_{gate}"] += da.T @ h_prev
            grads[f"b_{gate}"] += da.sum(axis=0)
        grads["V_o"] += da_o.T @ c

        dh_next = da_f @ p.U_f + da_c @ p.U_c + da_i @ p.U_i + da_o @ p.U_o
        dc_next = dc * f
    return grads
