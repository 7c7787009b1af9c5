from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from interpred.context.regions import NUM_REGIONS, ContextSequence
from interpred.models.head import ClassifierHead
from interpred.models.lstm import LstmParams, lstm_backward, lstm_forward
from interpred.numerics.kernels import cross_entropy, one_hot
from interpred.numerics.random import Rng

# Row order of every score matrix and fusion weight vector.
MODEL_ORDER = ("spatial", "temporal", "spatial_structural", "temporal_structural")


class Classifier(ABC):
    """Common surface of the four model families: batched forward, loss + gradients."""

    kind: str

    @abstractmethod
    def forward(self, inputs: np.ndarray) -> np.ndarray:
        """Batched inputs -> (batch, m) class probabilities."""

    @abstractmethod
    def loss_and_grads(
        self, inputs: np.ndarray, labels: np.ndarray
    ) -> tuple[float, dict[str, np.ndarray]]:
        """Mean cross-entropy against 0-based labels and gradients keyed like params()."""

    @abstractmethod
    def params(self) -> dict[str, np.ndarray]:
        """Parameter arrays by qualified name; the arrays are the live model state."""

    @abstractmethod
    def arch(self) -> dict:
        """Architecture description used to validate checkpoints."""

    @property
    @abstractmethod
    def num_classes(self) -> int: ...


def _prefixed(prefix: str, arrays: dict[str, np.ndarray]) -> dict[str, np.ndarray]:
    return {f"{prefix}.{name}": arr for name, arr in arrays.items()}


def _head_loss(
    head: ClassifierHead, features: np.ndarray, labels: np.ndarray
) -> tuple[float, dict[str, np.ndarray], np.ndarray, np.ndarray]:
    probs, cache = head.forward(features)
    loss = cross_entropy(probs, labels)
    dz = (probs - one_hot(labels, head.num_classes)) / len(labels)
    grads, dx = head.backward_logits(cache, dz)
    return loss, grads, dx, probs


@dataclass
class SpatialModel(Classifier):
    """Single-frame classifier on the global-region feature."""

    head: ClassifierHead
    kind: str = "spatial"

    @classmethod
    def init(cls, rng: Rng, dim: int, hidden: int, m: int) -> "SpatialModel":
        return cls(head=ClassifierHead.init(rng, dim, hidden, m))

    @property
    def num_classes(self) -> int:
        return self.head.num_classes

    def forward(self, inputs: np.ndarray) -> np.ndarray:
        probs, _ = self.head.forward(inputs)
        return probs

    def loss_and_grads(self, inputs, labels):
        loss, grads, _, _ = _head_loss(self.head, np.asarray(inputs, dtype=np.float64), labels)
        return loss, _prefixed("head", grads)

    def params(self) -> dict[str, np.ndarray]:
        return _prefixed("head", self.head.arrays())

    def arch(self) -> dict:
        return {
            "kind": self.kind,
            "input_dim": self.head.input_dim,
            "head_hidden": self.head.hidden,
            "num_classes": self.num_classes,
        }


@dataclass
class TemporalConvParams:
    """One length-k kernel per feature channel, collapsing (k, dim) to (dim,)."""

    kernel: np.ndarray  # (k, dim)

    @property
    def k(self) -> int:
        return int(self.kernel.shape[0])

    @classmethod
    def mean(cls, k: int, dim: int) -> "TemporalConvParams":
        return cls(kernel=np.full((k, dim), 1.0 / k))

    def collapse(self, stacks: np.ndarray) -> np.ndarray:
        stacks = np.asarray(stacks, dtype=np.float64)
        if stacks.shape[-2:] != self.kernel.shape:
            raise ValueError(
                f"expected stacks of shape (..., {self.k}, {self.kernel.shape[1]}), got {stacks.shape}"
            )
        return np.einsum("...kd,kd->...d", stacks, self.kernel)


@dataclass
class TemporalModel(Classifier):
    """Temporal convolution over a stack of k flow features, then FC-ReLU-FC-softmax."""

    conv: TemporalConvParams
    head: ClassifierHead
    kind: str = "temporal"

    @classmethod
    def init(cls, rng: Rng, dim: int, hidden: int, m: int, k: int) -> "TemporalModel":
        return cls(conv=TemporalConvParams.mean(k, dim), head=ClassifierHead.init(rng, dim, hidden, m))

    @property
    def k(self) -> int:
        return self.conv.k

    @property
    def num_classes(self) -> int:
        return self.head.num_classes

    def forward(self, inputs: np.ndarray) -> np.ndarray:
        probs, _ = self.head.forward(self.conv.collapse(inputs))
        return probs

    def loss_and_grads(self, inputs, labels):
        stacks = np.asarray(inputs, dtype=np.float64)
        loss, grads, dv, _ = _head_loss(self.head, self.conv.collapse(stacks), labels)
        out = _prefixed("head", grads)
        out["conv.kernel"] = np.einsum("bd,bkd->kd", dv, stacks)
        return loss, out

    def params(self) -> dict[str, np.ndarray]:
        out = _prefixed("head", self.head.arrays())
        out["conv.kernel"] = self.conv.kernel
        return out

    def arch(self) -> dict:
        return {
            "kind": self.kind,
            "input_dim": self.head.input_dim,
            "head_hidden": self.head.hidden,
            "num_classes": self.num_classes,
            "k": self.k,
        }


@dataclass
class StructuralModel(Classifier):
    """
    LSTM over the seven-step context sequence; the head scores each step's output
    value o_t and the per-step scores are averaged.
    """

    lstm: LstmParams
    head: ClassifierHead
    kind: str = "spatial_structural"

    @classmethod
    def init(
        cls, rng: Rng, dim: int, d: int, hidden: int, m: int, kind: str = "spatial_structural"
    ) -> "StructuralModel":
        lstm = LstmParams.init(rng, dim, d)
        return cls(lstm=lstm, head=ClassifierHead.init(rng, d, hidden, m), kind=kind)

    @property
    def num_classes(self) -> int:
        return self.head.num_classes

    def _check(self, seqs: np.ndarray) -> np.ndarray:
        seqs = np.asarray(seqs, dtype=np.float64)
        if seqs.ndim != 3 or seqs.shape[1] != NUM_REGIONS:
            raise ValueError(
                f"structural input must be (batch, {NUM_REGIONS}, dim), got {seqs.shape}"
            )
        return seqs

    def step_scores(self, seqs: np.ndarray) -> np.ndarray:
        """Per-step class scores, (batch, 7, m)."""
        trace = lstm_forward(self.lstm, self._check(seqs))
        probs, _ = self.head.forward(trace.outputs)
        return probs

    def forward(self, inputs: np.ndarray) -> np.ndarray:
        return self.step_scores(inputs).mean(axis=1)

    def loss_and_grads(self, inputs, labels):
        seqs = self._check(inputs)
        batch, steps, _ = seqs.shape
        trace = lstm_forward(self.lstm, seqs)
        step_probs, cache = self.head.forward(trace.outputs)
        mean_probs = step_probs.mean(axis=1)
        loss = cross_entropy(mean_probs, labels)

        rows = np.arange(batch)
        d_mean = np.zeros_like(mean_probs)
        d_mean[rows, labels] = -1.0 / (batch * np.maximum(mean_probs[rows, labels], 1e-300))
        d_steps = np.repeat(d_mean[:, None, :] / steps, steps, axis=1)
        head_grads, d_outputs = self.head.backward(cache, d_steps)
        grads = _prefixed("head", head_grads)
        grads.update(_prefixed("lstm", lstm_backward(self.lstm, trace, d_outputs)))
        return loss, grads

    def params(self) -> dict[str, np.ndarray]:
        out = _prefixed("lstm", self.lstm.arrays())
        out.update(_prefixed("head", self.head.arrays()))
        return out

    def arch(self) -> dict:
        return {
            "kind": self.kind,
            "input_dim": self.lstm.input_dim,
            "lstm_units": self.lstm.d,
            "head_hidden": self.head.hidden,
            "num_classes": self.num_classes,
        }


def structural_forward(lstm: LstmParams, head: ClassifierHead, seq: ContextSequence) -> np.ndarray:
    """Step-averaged class scores of one context sequence."""
    regions = seq.regions if isinstance(seq, ContextSequence) else ContextSequence(seq).regions
    return StructuralModel(lstm=lstm, head=head).forward(regions[None])[0]


def spatial_forward(head: ClassifierHead, feat: np.ndarray) -> np.ndarray:
    return SpatialModel(head=head).forward(np.asarray(feat)[None])[0]


def temporal_forward(
    conv: TemporalConvParams, head: ClassifierHead, flows: Sequence[np.ndarray]
) -> np.ndarray:
    stack = np.asarray(flows, dtype=np.float64)
    if stack.shape[0] != conv.k:
        raise ValueError(f"temporal model needs exactly {conv.k} flow features, got {stack.shape[0]}")
    return TemporalModel(conv=conv, head=head).forward(stack[None])[0]


def pad_flow_sequence(flows_so_far: Sequence, t: int, k: int) -> list:
    """
    Input stack for step t: the last k flows when t >= k, otherwise all t flows
    followed by the t-th flow repeated k - t times.
    """
    if t < 1 or len(flows_so_far) == 0:
        raise ValueError("pad_flow_sequence needs at least one flow")
    if len(flows_so_far) != t:
        raise ValueError(f"expected {t} flows, got {len(flows_so_far)}")
    flows = list(flows_so_far)
    if t >= k:
        return flows[t - k :]
    return flows + [flows[-1]] * (k - t)
