from __future__ import annotations

import numpy as np

Rng = np.random.Generator


def make_rng(seed: int) -> Rng:
    """PCG64 generator; equal seeds give equal draws on every platform."""
    if not (0 <= int(seed) < 2**64):
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return np.random.Generator(np.random.PCG64(int(seed)))


def spawn(rng: Rng, n: int) -> list[Rng]:
    """Independent child generators, one per worker."""
    return [np.random.Generator(bit) for bit in rng.bit_generator.spawn(n)]


def xavier_uniform(rng: Rng, rows: int, cols: int) -> np.ndarray:
    """Uniform(-a, a) with a = sqrt(6 / (fan_in + fan_out)); cols is the fan-in."""
    limit = np.sqrt(6.0 / (rows + cols))
    return rng.uniform(-limit, limit, size=(rows, cols))
