"""Coarsening, FM refinement, multilevel bisection, recursive partitioning."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from graphclust.errors import BalanceError, UsageError
from graphclust.graph import WeightedGraph
from graphclust.partitioner import (
    COARSEN_THRESHOLD,
    DEFAULT_EPS,
    coarsen,
    compute_m,
    fm_refine,
    initial_bisect,
    multilevel_bisect,
    partition,
)

from conftest import planted_bisection_graph, random_graph


def ring(n, w=1.0):
    u = np.arange(n)
    return WeightedGraph.from_edges(n, u, (u + 1) % n, np.full(n, w))


def two_cliques(size, bridge_weight=0.5, bridges=1):
    """Two complete graphs of ``size`` vertices joined by light edges."""
    edges = []
    for base in (0, size):
        for i in range(size):
            for j in range(i + 1, size):
                edges.append((base + i, base + j, 1.0))
    for b in range(bridges):
        edges.append((b % size, size + (b % size), bridge_weight))
    u, v, w = zip(*edges)
    return WeightedGraph.from_edges(2 * size, u, v, w)


def all_cuts(g):
    """Cut weight of every 0/1 side assignment, vectorized over bitmasks."""
    eu, ev, ew = g.edge_list()
    masks = np.arange(2 ** g.n, dtype=np.uint64)
    sides = (masks[:, None] >> np.arange(g.n, dtype=np.uint64)) & 1
    cross = sides[:, eu] != sides[:, ev]
    return sides.astype(np.int8), cross @ ew


# -- part-count formula ---------------------------------------------------


def test_compute_m_frozen_values():
    assert compute_m(16) == 2
    assert compute_m(150) == 6
    assert compute_m(10992) == 52
    assert compute_m(1) == 1
    assert compute_m(2) == 2
    assert compute_m(3) == 2
    with pytest.raises(UsageError):
        compute_m(0)


@given(st.integers(1, 10 ** 6))
def test_compute_m_bounds(n):
    m = compute_m(n)
    assert 1 <= m <= n
    if n >= 2:
        assert m >= 2
    if n >= 36:
        assert m == math.isqrt(n) // 2


# -- coarsening -----------------------------------------------------------


def test_coarsen_path_matches_hand_trace():
    # path a-b-c with a heavy a-b edge: visiting a first matches {a,b}
    g = WeightedGraph.from_edges(3, [0, 1], [1, 2], [5.0, 1.0])
    lvl = coarsen(g, order=np.array([0, 1, 2]))
    np.testing.assert_array_equal(lvl.mapping, [0, 0, 1])
    assert lvl.graph.n == 2
    np.testing.assert_array_equal(lvl.graph.vertex_weights, [2, 1])
    u, v, w = lvl.graph.edge_list()
    assert (u[0], v[0], w[0]) == (0, 1, 1.0)


def test_coarsen_heaviest_edge_wins_ties_low():
    # star: equal-weight edges from 0 to 1 and 2 -> 0 pairs with 1
    g = WeightedGraph.from_edges(3, [0, 0], [1, 2], [5.0, 5.0])
    lvl = coarsen(g, order=np.array([0, 1, 2]))
    assert lvl.mapping[0] == lvl.mapping[1] != lvl.mapping[2]


def test_coarsen_respects_vertex_weight_cap():
    g = WeightedGraph.from_edges(
        3, [0, 0], [1, 2], [9.0, 1.0], vertex_weights=[3, 3, 1]
    )
    lvl = coarsen(g, order=np.array([0, 1, 2]), max_vertex_weight=4)
    # 0+1 would weigh 6 > 4, so 0 grabs vertex 2 instead
    assert lvl.mapping[0] == lvl.mapping[2] != lvl.mapping[1]
    assert lvl.graph.vertex_weights.max() <= 4


def test_coarsen_edgeless_keeps_singletons():
    g = WeightedGraph.from_edges(4, [], [], [])
    lvl = coarsen(g, order=np.arange(4))
    assert lvl.graph.n == 4
    np.testing.assert_array_equal(lvl.mapping, np.arange(4))


@given(st.integers(2, 20), st.floats(0.1, 0.9), st.integers(0, 2 ** 31 - 1))
def test_coarsen_conserves_weight_against_dict_oracle(n, p, seed):
    g = random_graph(n, p, seed)
    lvl = coarsen(g, rng=np.random.default_rng(seed + 1))
    cmap, coarse = lvl.mapping, lvl.graph
    # mapping is a surjection onto 0..coarse.n-1 with fibers of size <= 2
    assert set(cmap.tolist()) == set(range(coarse.n))
    _, fiber = np.unique(cmap, return_counts=True)
    assert fiber.max() <= 2
    assert coarse.vertex_weights.sum() == g.vertex_weights.sum()
    # matched pairs share an edge
    for c in np.flatnonzero(fiber == 2):
        a, b = np.flatnonzero(cmap == c)
        assert b in g.neighbors(a)[0]
    # contracted edge weights add up exactly
    expect = {}
    for u, v, w in zip(*g.edge_list()):
        cu, cv = int(cmap[u]), int(cmap[v])
        if cu != cv:
            key = (min(cu, cv), max(cu, cv))
            expect[key] = expect.get(key, 0.0) + float(w)
    got = {(int(u), int(v)): float(w) for u, v, w in zip(*coarse.edge_list())}
    assert got.keys() == expect.keys()
    for key in expect:
        assert got[key] == pytest.approx(expect[key], rel=1e-12)


# -- FM refinement --------------------------------------------------------


def test_fm_leaves_optimum_alone():
    g = two_cliques(3, bridge_weight=0.1)
    side = np.array([0, 0, 0, 1, 1, 1], dtype=np.int8)
    out = fm_refine(g, side, targets=(3.0, 3.0))
    np.testing.assert_array_equal(out, side)


def test_fm_repairs_single_misplaced_vertex():
    g = two_cliques(4, bridge_weight=0.5)
    side = np.array([0, 0, 0, 0, 0, 1, 1, 1], dtype=np.int8)  # vertex 4 misplaced
    out = fm_refine(g, side, targets=(4.0, 4.0))
    assert g.cut_weight(out) == pytest.approx(0.5)
    np.testing.assert_array_equal(out, [0, 0, 0, 0, 1, 1, 1, 1])


@given(st.integers(4, 16), st.floats(0.2, 0.8), st.integers(0, 2 ** 31 - 1))
@settings(max_examples=60)
def test_fm_never_worsens_feasible_input(n, p, seed):
    g = random_graph(n, p, seed)
    rng = np.random.default_rng(seed + 3)
    # build a feasible random start: half the vertices on side 0
    side = np.zeros(n, dtype=np.int8)
    side[rng.permutation(n)[: n // 2]] = 1
    t = (n - n // 2, n // 2)
    before = g.cut_weight(side)
    out = fm_refine(g, side, targets=t)
    after = g.cut_weight(out)
    assert after <= before + 1e-12
    w0 = (out == 0).sum()
    assert t[0] * 0.9 - 1e-9 <= w0 <= t[0] * 1.1 + 1e-9 or w0 == (side == 0).sum()


def test_initial_bisect_finds_bridge():
    g = two_cliques(3, bridge_weight=0.1)
    side = initial_bisect(g, (3.0, 3.0), rng=np.random.default_rng(0))
    assert g.cut_weight(side) == pytest.approx(0.1)
    assert (side == 0).sum() == 3


def test_initial_bisect_isolated_vertices():
    g = WeightedGraph.from_edges(2, [], [], [])
    side = initial_bisect(g, (1.0, 1.0), rng=np.random.default_rng(1))
    assert sorted(side.tolist()) == [0, 1]
    assert g.cut_weight(side) == 0.0


def test_initial_bisect_rejects_overweight_vertex():
    g = WeightedGraph.from_edges(2, [0], [1], [1.0], vertex_weights=[100, 1])
    with pytest.raises(BalanceError):
        initial_bisect(g, (50.0, 51.0), rng=np.random.default_rng(0))


# -- multilevel bisection -------------------------------------------------


def test_multilevel_requires_two_vertices():
    g = WeightedGraph.from_edges(1, [], [], [])
    with pytest.raises(UsageError):
        multilevel_bisect(g, (0.5, 0.5))


def test_multilevel_recovers_planted_cut():
    for seed in range(10):
        g = planted_bisection_graph(seed)
        side = multilevel_bisect(g, (50.0, 50.0), seed=seed)
        assert g.cut_weight(side) == pytest.approx(1.0)


def test_multilevel_is_deterministic():
    g = planted_bisection_graph(123)
    a = multilevel_bisect(g, (50.0, 50.0), seed=7)
    b = multilevel_bisect(g, (50.0, 50.0), seed=7)
    np.testing.assert_array_equal(a, b)


def test_multilevel_coarsens_large_inputs():
    g = planted_bisection_graph(5, side=120, intra_deg=5)
    trace = []
    side = multilevel_bisect(g, (120.0, 120.0), seed=3, trace=trace)
    assert len(trace) >= 2  # at least one coarse level plus the finest
    assert trace[0][0] <= COARSEN_THRESHOLD
    assert trace[-1][0] == 240
    # cuts never get worse while uncoarsening
    cuts = [t[2] for t in trace]
    assert cuts[-1] <= cuts[0] + 1e-9
    assert g.cut_weight(side) == cuts[-1]


def test_multilevel_within_2x_of_bruteforce_on_small_planted():
    """Exhaustive optimum comparison on >= 100 seeded toy instances."""
    trials = 0
    within = 0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        size = int(rng.integers(3, 7))  # 6..12 vertices
        g = two_cliques(size, bridge_weight=0.3, bridges=int(rng.integers(1, 3)))
        n = g.n
        sides, cuts = all_cuts(g)
        w0 = sides.sum(axis=1)
        t0 = n / 2.0
        feas = (np.abs(n - w0 - t0) <= DEFAULT_EPS * t0 + 1e-9) & (
            np.abs(w0 - t0) <= DEFAULT_EPS * t0 + 1e-9
        )
        opt = cuts[feas].min()
        got = g.cut_weight(multilevel_bisect(g, (t0, t0), seed=seed))
        assert got >= opt - 1e-9  # can't beat the optimum
        trials += 1
        if got <= 2.0 * opt + 1e-9:
            within += 1
    assert trials >= 100
    assert within >= 95  # statistically tight; typically 100


# -- recursive m-way partition --------------------------------------------


def test_partition_single_part_is_trivial():
    g = random_graph(7, 0.5, seed=0)
    np.testing.assert_array_equal(partition(g, 1), np.zeros(7, dtype=np.int64))


def test_partition_validation():
    g = random_graph(5, 0.5, seed=0)
    with pytest.raises(UsageError):
        partition(g, 0)
    with pytest.raises(UsageError):
        partition(g, 6)


def test_partition_ring_into_two_arcs():
    g = ring(16)
    labels = partition(g, 2, seed=0)
    assert sorted(np.bincount(labels).tolist()) == [8, 8]
    assert g.cut_weight(labels) == 2.0  # two arc-boundary edges


def test_partition_singletons_when_m_equals_n():
    g = two_cliques(3, bridge_weight=1.0)
    labels = partition(g, 6, seed=1)
    assert sorted(labels.tolist()) == list(range(6))


@given(st.integers(8, 40), st.integers(2, 6), st.integers(0, 2 ** 31 - 1))
@settings(max_examples=40)
def test_partition_balance_and_compact_ids(n, m, seed):
    g = random_graph(n, 0.4, seed)
    m = min(m, n)
    labels = partition(g, m, seed=seed)
    sizes = np.bincount(labels, minlength=m)
    assert labels.min() == 0 and labels.max() == m - 1
    assert sizes.min() >= 1
    cap = math.floor(1.1 * math.ceil(n / m) + 1e-9)
    assert sizes.max() <= cap


def test_partition_deterministic_and_scale_invariant():
    g = planted_bisection_graph(77)
    base = partition(g, 4, seed=5)
    np.testing.assert_array_equal(base, partition(g, 4, seed=5))
    # power-of-two weight scalings leave every comparison identical
    for c in (0.25, 2.0, 4.0, 1024.0):
        np.testing.assert_array_equal(base, partition(g.scaled(c), 4, seed=5))


def test_partition_separates_planted_clusters():
    g = planted_bisection_graph(9)
    labels = partition(g, 2, seed=9)
    # the two 50-vertex clusters come out exactly
    assert len(set(labels[:50].tolist())) == 1
    assert len(set(labels[50:].tolist())) == 1
    assert labels[0] != labels[50]
