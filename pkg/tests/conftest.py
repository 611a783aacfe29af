"""Shared fixtures: datasets, random graph builders, hypothesis profile."""

import os
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings, HealthCheck

from graphclust.dataset import PointSet, load_csv, write_csv
from graphclust.graph import WeightedGraph

ROOT = Path(__file__).resolve().parents[1]
DATA_DIR = ROOT / "data"

# Property tests do real numerics; wall-clock deadlines just add flakiness.
settings.register_profile(
    "graphclust",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "graphclust"))


def _materialize_iris(path):
    from sklearn.datasets import load_iris

    raw = load_iris()
    pts = PointSet(np.ascontiguousarray(raw.data, dtype=np.float64))
    write_csv(path, pts, labels=raw.target.astype(np.int64))


@pytest.fixture(scope="session")
def iris():
    """(PointSet, labels) for iris; materialized locally if the CSV is absent."""
    path = DATA_DIR / "iris.csv"
    if not path.exists():
        DATA_DIR.mkdir(exist_ok=True)
        _materialize_iris(path)
    return load_csv(path, label_column="last")


def dataset_path(name):
    """Path to a named dataset CSV under data/ (may not exist)."""
    return DATA_DIR / f"{name}.csv"


def random_graph(n, p, seed, weight_lo=0.1, weight_hi=2.0):
    """Erdos-Renyi-ish weighted graph; may be disconnected."""
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(iu.size) < p
    u, v = iu[keep], ju[keep]
    w = rng.uniform(weight_lo, weight_hi, size=u.size)
    return WeightedGraph.from_edges(n, u, v, w)


def planted_bisection_graph(seed, side=50, intra_deg=6, bridges=2,
                            bridge_weight=0.5):
    """Two dense random clusters joined by a few light bridge edges."""
    rng = np.random.default_rng(seed)
    edges = []
    for base in (0, side):
        for v in range(side):
            for u in rng.choice(side, size=intra_deg, replace=False):
                if u != v:
                    edges.append((base + v, base + u, 1.0))
    for _ in range(bridges):
        a = int(rng.integers(side))
        b = int(rng.integers(side))
        edges.append((a, side + b, bridge_weight))
    u, v, w = zip(*edges)
    return WeightedGraph.from_edges(2 * side, u, v, w, merge="max")


def grouped_labels(groups, n):
    """Dense labels from a list of member-index arrays covering range(n)."""
    out = np.full(n, -1, dtype=np.int64)
    for gid, members in enumerate(groups):
        out[np.asarray(members, dtype=np.int64)] = gid
    assert (out >= 0).all()
    return out


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Replay acceptance verdicts after capture ends so they always show."""
    import sys as _sys

    mod = _sys.modules.get("test_acceptance")
    lines = getattr(mod, "VERDICTS", None) if mod is not None else None
    if lines:
        terminalreporter.ensure_newline()
        terminalreporter.section("acceptance criteria", sep="-")
        for line in lines:
            terminalreporter.write_line(line)
