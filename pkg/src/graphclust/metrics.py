"""Clustering agreement metrics: NMI and accuracy under optimal label matching.

Both scores are invariant to relabeling of either argument. NMI is the
mutual information of the empirical joint label distribution normalized
by the mean of the two entropies; ACC counts matches after the cluster-id
permutation chosen by a maximum-weight assignment on the confusion matrix.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import DataError


def _check_pair(x, y) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=np.int64)
    y = np.asarray(y, dtype=np.int64)
    if x.ndim != 1 or y.ndim != 1:
        raise DataError("label vectors must be 1-d")
    if x.shape != y.shape:
        raise DataError(f"label length mismatch: {x.size} vs {y.size}")
    if x.size == 0:
        raise DataError("empty label vectors")
    if x.min() < 0 or y.min() < 0:
        raise DataError("labels must be non-negative integers")
    return x, y


def confusion(x, y) -> np.ndarray:
    """K x K count matrix c[a][b] = |{i : x_i = a, y_i = b}|, zero-padded square."""
    x, y = _check_pair(x, y)
    k = int(max(x.max(), y.max())) + 1
    m = np.zeros((k, k), dtype=np.int64)
    np.add.at(m, (x, y), 1)
    return m


def hungarian(costs: np.ndarray, sense: str = "maximize") -> np.ndarray:
    """Assignment permutation sigma optimizing sum_i costs[i][sigma(i)].

    Returns sigma as an int array; ``sense`` is "maximize" or "minimize".
    """
    costs = np.asarray(costs, dtype=np.float64)
    if costs.ndim != 2 or costs.shape[0] != costs.shape[1]:
        raise DataError(f"cost matrix must be square, got shape {costs.shape}")
    if sense not in ("maximize", "minimize"):
        raise DataError(f"unknown sense {sense!r}")
    _, cols = linear_sum_assignment(costs, maximize=(sense == "maximize"))
    return cols.astype(np.int64)


def _entropy(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(-(p * np.log(p)).sum())


def nmi(x, y) -> float:
    """Normalized mutual information 2*I(X;Y)/(H(X)+H(Y)) in [0, 1].

    Degenerate rule when the ratio is 0/0: both labelings constant -> 1.0,
    exactly one constant -> 0.0.
    """
    m = confusion(x, y).astype(np.float64)
    n = m.sum()
    hx = _entropy(m.sum(axis=1) / n)
    hy = _entropy(m.sum(axis=0) / n)
    if hx == 0.0 and hy == 0.0:
        return 1.0
    if hx == 0.0 or hy == 0.0:
        return 0.0
    hxy = _entropy(m.ravel() / n)
    mi = hx + hy - hxy
    return float(min(1.0, max(0.0, 2.0 * mi / (hx + hy))))


def acc(x, y) -> float:
    """Fraction of points matched under the optimal cluster-to-class mapping."""
    m = confusion(x, y)
    sigma = hungarian(m.astype(np.float64), "maximize")
    matched = m[np.arange(m.shape[0]), sigma].sum()
    return float(matched) / float(m.sum())
