"""Synthetic Gaussian-blob datasets for scaling runs and tests."""

from __future__ import annotations

import numpy as np

from .dataset import PointSet
from .errors import UsageError


def gaussian_blobs(
    n: int,
    centers: int = 10,
    d: int = 16,
    spread: float = 0.5,
    box: float = 10.0,
    seed=0,
) -> tuple[PointSet, np.ndarray]:
    """``n`` points split near-evenly over ``centers`` isotropic Gaussians.

    Centers are uniform in [0, box]^d, each blob has per-axis stdev
    ``spread``. Returns the points plus the generating blob id per point
    (points arrive grouped by blob). Deterministic given seed.
    """
    if n < 1:
        raise UsageError(f"need n >= 1, got {n}")
    if centers < 1 or centers > n:
        raise UsageError(f"centers must be in 1..{n}, got {centers}")
    rng = np.random.default_rng(seed)
    mu = rng.uniform(0.0, box, size=(centers, d))
    sizes = np.full(centers, n // centers, dtype=np.int64)
    sizes[: n % centers] += 1
    labels = np.repeat(np.arange(centers, dtype=np.int64), sizes)
    data = mu[labels] + rng.normal(0.0, spread, size=(n, d))
    return PointSet(np.ascontiguousarray(data)), labels
