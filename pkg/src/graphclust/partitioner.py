"""Multilevel graph bisection and recursive m-way partitioning.

The bisection follows the classic three-phase scheme: heavy-edge matching
coarsens the graph until it is small, a handful of greedy/random seeds are
tried on the coarsest graph, and the winning bisection is projected back
up with a Fiduccia-Mattheyses refinement pass at every level. m-way
partitioning is recursive bisection with vertex-weight targets split in
ratio ceil(m'/2):floor(m'/2), and with per-side weight bounds propagated
down the recursion so every final part stays within (1+eps)*ceil(W/m).

All randomness flows through numpy Generators; refinement itself is
deterministic (ties broken by vertex index), so a fixed seed fixes the
partition.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .errors import BalanceError, UsageError
from .graph import WeightedGraph

COARSEN_THRESHOLD = 100
SHRINK_LIMIT = 0.9  # stop coarsening when a level keeps > 90% of vertices
DEFAULT_TRIALS = 10
DEFAULT_MAX_PASSES = 10
DEFAULT_EPS = 0.10


def compute_m(n: int) -> int:
    """Default part count max(2, floor(sqrt(n)/2)), capped at n."""
    if n < 1:
        raise UsageError(f"need at least one point, got n={n}")
    return min(max(2, math.isqrt(n) // 2), n)


@dataclass
class CoarseningLevel:
    """One coarsening step: the coarse graph plus the fine->coarse map."""

    graph: WeightedGraph
    mapping: np.ndarray


def coarsen(
    g: WeightedGraph,
    rng: np.random.Generator | None = None,
    order: np.ndarray | None = None,
    max_vertex_weight: int | None = None,
) -> CoarseningLevel:
    """Contract a heavy-edge matching.

    Vertices are visited in ``order`` (a random permutation by default);
    each unmatched vertex grabs its heaviest-edge unmatched neighbor, ties
    going to the lowest index. Pairs whose combined weight would exceed
    ``max_vertex_weight`` are not matched, which keeps coarse vertices
    small enough for a balanced initial bisection.
    """
    n = g.n
    if order is None:
        if rng is None:
            rng = np.random.default_rng(0)
        order = rng.permutation(n)
    cap = max_vertex_weight
    # plain-list traversal: the loop visits every vertex and scans its row,
    # which is far cheaper without numpy scalar indexing
    indptr = g.indptr.tolist()
    indices = g.indices.tolist()
    wts = g.weights.tolist()
    vw_l = g.vertex_weights.tolist()
    cmap_l = [-1] * n
    nxt = 0
    neg_inf = float("-inf")
    for v in np.asarray(order).tolist():
        if cmap_l[v] >= 0:
            continue
        mate = -1
        best_w = neg_inf
        lim = None if cap is None else cap - vw_l[v]
        for i in range(indptr[v], indptr[v + 1]):
            u = indices[i]
            if cmap_l[u] >= 0:
                continue
            if lim is not None and vw_l[u] > lim:
                continue
            w = wts[i]
            # rows are sorted by neighbor, so a strict > keeps the lowest
            # index among equal weights
            if w > best_w:
                best_w = w
                mate = u
        cmap_l[v] = nxt
        if mate >= 0:
            cmap_l[mate] = nxt
        nxt += 1
    cmap = np.array(cmap_l, dtype=np.int64)
    coarse_vw = np.bincount(cmap, weights=g.vertex_weights, minlength=nxt).astype(np.int64)
    eu, ev, ew = g.edge_list()
    coarse = WeightedGraph.from_edges(nxt, cmap[eu], cmap[ev], ew, coarse_vw, merge="sum")
    return CoarseningLevel(graph=coarse, mapping=cmap)


# -- FM refinement --------------------------------------------------------


def _bounds(total, targets, eps, ub, lb):
    t0, t1 = float(targets[0]), float(targets[1])
    if ub is None:
        ub = ((1.0 + eps) * t0, (1.0 + eps) * t1)
    if lb is None:
        lb = (max(total - ub[1], 0.0), max(total - ub[0], 0.0))
    return ub, lb


def _feasible(w0, w1, ub, lb):
    return lb[0] <= w0 <= ub[0] and lb[1] <= w1 <= ub[1]


def _fm_pass(g, side, w_side, ub, lb, gain, ext_w, stall_limit):
    """One tentative-move pass; returns (side, w_side, changed).

    Moves are taken greedily by gain, each vertex at most once, balance
    bounds respected at every step; afterwards the best prefix (feasible
    states first, then lowest cut) is kept and the rest rolled back.

    The move loop touches single entries millions of times per run, so it
    works on plain lists and floats; element access is several times
    cheaper than numpy scalar indexing and the arithmetic is the same
    IEEE double either way.
    """
    n = g.n
    boundary = np.flatnonzero(ext_w > 0)  # vertices with an external edge
    if boundary.size == 0:
        boundary = np.arange(n)
    indptr = g.indptr.tolist()
    indices = g.indices.tolist()
    weights = g.weights.tolist()
    vw = g.vertex_weights.tolist()
    side_l = side.tolist()
    gain_l = gain.tolist()
    moved = [False] * n
    heaps: list[list] = [[], []]
    for v in boundary.tolist():
        heaps[side_l[v]].append((-gain_l[v], v))
    heapq.heapify(heaps[0])
    heapq.heapify(heaps[1])
    heappush, heappop = heapq.heappush, heapq.heappop

    w0, w1 = float(w_side[0]), float(w_side[1])
    ub0, ub1 = float(ub[0]), float(ub[1])
    lb0, lb1 = float(lb[0]), float(lb[1])
    min_vw = min(vw)
    log: list[int] = []
    gain_sum = 0.0
    best_j = 0
    best_key = (0 if (lb0 <= w0 <= ub0 and lb1 <= w1 <= ub1) else 1, 0.0)
    stall = 0

    def peek(s, parked):
        h = heaps[s]
        if s == 0:
            cap_dest, w_dest, w_src, lo_src = ub1, w1, w0, lb0
        else:
            cap_dest, w_dest, w_src, lo_src = ub0, w0, w1, lb1
        # if even the lightest vertex would break a bound, every entry on
        # this side is blocked; skip the scan instead of parking them all
        if w_dest + min_vw > cap_dest or w_src - min_vw < lo_src:
            return None
        while h:
            entry = h[0]
            v = entry[1]
            if moved[v] or -entry[0] != gain_l[v]:
                heappop(h)
                continue
            wv = vw[v]
            if w_dest + wv > cap_dest or w_src - wv < lo_src:
                parked.append(heappop(h))
                continue
            return entry
        return None

    while True:
        parked0: list = []
        parked1: list = []
        c0 = peek(0, parked0)
        c1 = peek(1, parked1)
        if c0 is None and c1 is None:
            break
        entry = c0 if c1 is None or (c0 is not None and c0 <= c1) else c1
        v = entry[1]
        s = side_l[v]
        heappop(heaps[s])
        for e in parked0:
            heappush(heaps[0], e)
        for e in parked1:
            heappush(heaps[1], e)

        side_l[v] = 1 - s
        moved[v] = True
        wv = vw[v]
        if s == 0:
            w0 -= wv
            w1 += wv
        else:
            w1 -= wv
            w0 += wv
        gain_sum += gain_l[v]
        log.append(v)
        for i in range(indptr[v], indptr[v + 1]):
            u = indices[i]
            if moved[u]:
                continue
            if side_l[u] == s:
                gu = gain_l[u] + 2.0 * weights[i]
            else:
                gu = gain_l[u] - 2.0 * weights[i]
            gain_l[u] = gu
            heappush(heaps[side_l[u]], (-gu, u))

        key = (0 if (lb0 <= w0 <= ub0 and lb1 <= w1 <= ub1) else 1, -gain_sum)
        if key < best_key:
            best_key = key
            best_j = len(log)
            stall = 0
        else:
            stall += 1
            if stall >= stall_limit:
                break

    for v in log[best_j:]:
        s = side_l[v]
        side_l[v] = 1 - s
        wv = vw[v]
        if s == 0:
            w0 -= wv
            w1 += wv
        else:
            w1 -= wv
            w0 += wv
    return np.array(side_l, dtype=np.int8), (w0, w1), best_j > 0


def fm_refine(
    g: WeightedGraph,
    side: np.ndarray,
    targets,
    eps: float = DEFAULT_EPS,
    ub=None,
    lb=None,
    max_passes: int = DEFAULT_MAX_PASSES,
    stall_limit: int | None = None,
) -> np.ndarray:
    """Iterated FM passes; never worsens a feasible input bisection.

    ``targets`` are the desired per-side vertex weights; explicit ``ub``
    and ``lb`` per-side weight bounds override the (1 +/- eps) defaults.
    Stops after a pass with no committed improvement or ``max_passes``.
    """
    side = np.asarray(side).astype(np.int8).copy()
    total = float(g.vertex_weights.sum())
    ub, lb = _bounds(total, targets, eps, ub, lb)
    if stall_limit is None:
        stall_limit = max(64, g.n // 8)
    w0 = float(g.vertex_weights[side == 0].sum())
    w1 = total - w0
    deg_w = np.bincount(g.rows, weights=g.weights, minlength=g.n)
    cur_cut = g.cut_weight(side)
    cur_key = (0 if _feasible(w0, w1, ub, lb) else 1, cur_cut)
    for _ in range(max_passes):
        ext = side[g.rows] != side[g.indices]
        ext_w = np.bincount(g.rows[ext], weights=g.weights[ext], minlength=g.n)
        gain = 2.0 * ext_w - deg_w
        trial = side.copy()
        trial, (tw0, tw1), changed = _fm_pass(
            g, trial, (w0, w1), ub, lb, gain, ext_w, stall_limit
        )
        if not changed:
            break
        new_cut = g.cut_weight(trial)
        new_key = (0 if _feasible(tw0, tw1, ub, lb) else 1, new_cut)
        if new_key < cur_key:
            side, w0, w1, cur_cut, cur_key = trial, tw0, tw1, new_cut, new_key
        else:
            break
    return side


# -- initial bisection ----------------------------------------------------


def _grow_seed(g, t0, ub0, rng):
    """Greedy region growing: absorb the unassigned vertex best connected
    to the region until its weight reaches the side-0 target; restarts at a
    random vertex whenever the frontier dies (disconnected graphs)."""
    n = g.n
    vw = g.vertex_weights
    in_region = np.zeros(n, dtype=bool)
    dead = np.zeros(n, dtype=bool)
    conn = np.zeros(n, dtype=np.float64)
    heap: list = []
    acc = 0.0
    while acc < t0:
        v = -1
        while heap:
            negc, u = heapq.heappop(heap)
            if in_region[u] or dead[u] or -negc != conn[u]:
                continue
            v = u
            break
        if v < 0:
            free = np.flatnonzero(~in_region & ~dead)
            if free.size == 0:
                break
            v = int(free[rng.integers(free.size)])
        if acc + vw[v] > ub0:
            dead[v] = True
            continue
        in_region[v] = True
        acc += vw[v]
        nbrs, wts = g.neighbors(v)
        for u, w in zip(nbrs, wts):
            if not in_region[u] and not dead[u]:
                conn[u] += w
                heapq.heappush(heap, (-conn[u], u))
    return np.where(in_region, 0, 1).astype(np.int8)


def _random_seed(g, t0, ub0, rng):
    """Shuffled greedy fill of side 0 up to its target weight."""
    side = np.ones(g.n, dtype=np.int8)
    vw = g.vertex_weights
    acc = 0.0
    for v in rng.permutation(g.n):
        if acc >= t0:
            break
        if acc + vw[v] <= ub0:
            side[v] = 0
            acc += vw[v]
    return side


def initial_bisect(
    g: WeightedGraph,
    target,
    trials: int = DEFAULT_TRIALS,
    eps: float = DEFAULT_EPS,
    rng: np.random.Generator | None = None,
    ub=None,
    lb=None,
    max_passes: int = DEFAULT_MAX_PASSES,
) -> np.ndarray:
    """Best of ``trials`` refined seed bisections (lowest feasible cut).

    Seeds alternate between greedy region growing and random fill; each is
    FM-refined before scoring. Raises BalanceError when a single vertex
    outweighs (1+eps) times the larger target.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    total = float(g.vertex_weights.sum())
    t0, t1 = float(target[0]), float(target[1])
    heaviest = float(g.vertex_weights.max()) if g.n else 0.0
    if heaviest > (1.0 + eps) * max(t0, t1):
        raise BalanceError(
            f"vertex weight {heaviest:g} exceeds (1+eps) * max target "
            f"{(1.0 + eps) * max(t0, t1):g}"
        )
    ub, lb = _bounds(total, target, eps, ub, lb)
    best = None
    best_key = None
    for trial in range(max(1, trials)):
        if trial % 2 == 0:
            seed_side = _grow_seed(g, t0, ub[0], rng)
        else:
            seed_side = _random_seed(g, t0, ub[0], rng)
        side = fm_refine(g, seed_side, target, eps, ub=ub, lb=lb, max_passes=max_passes)
        w0 = float(g.vertex_weights[side == 0].sum())
        key = (0 if _feasible(w0, total - w0, ub, lb) else 1, g.cut_weight(side))
        if best_key is None or key < best_key:
            best, best_key = side, key
    return best


# -- multilevel bisection -------------------------------------------------


def multilevel_bisect(
    g: WeightedGraph,
    targets,
    eps: float = DEFAULT_EPS,
    seed=0,
    ub=None,
    lb=None,
    trials: int = DEFAULT_TRIALS,
    max_passes: int = DEFAULT_MAX_PASSES,
    coarsen_threshold: int = COARSEN_THRESHOLD,
    trace: list | None = None,
) -> np.ndarray:
    """Coarsen / initial-bisect / refine-while-uncoarsening.

    Returns a length-n side array of 0s and 1s. ``trace``, if a list, gets
    one (n, edges, cut) tuple appended per level, finest last.
    """
    if g.n < 2:
        raise UsageError(f"cannot bisect a graph with {g.n} vertices")
    rng = np.random.default_rng(seed)
    total = float(g.vertex_weights.sum())
    ub, lb = _bounds(total, targets, eps, ub, lb)
    cap = max(int(math.ceil(1.5 * total / coarsen_threshold)), 2)

    levels: list[CoarseningLevel] = []
    cur = g
    while cur.n > coarsen_threshold:
        lvl = coarsen(cur, rng=rng, max_vertex_weight=cap)
        if lvl.graph.n >= cur.n:
            break
        shrink = lvl.graph.n / cur.n
        levels.append(lvl)
        cur = lvl.graph
        if shrink > SHRINK_LIMIT:
            break

    side = initial_bisect(
        cur, targets, trials=trials, eps=eps, rng=rng, ub=ub, lb=lb, max_passes=max_passes
    )
    if trace is not None:
        trace.append((cur.n, cur.num_edges, cur.cut_weight(side)))
    for i in range(len(levels) - 1, -1, -1):
        fine = g if i == 0 else levels[i - 1].graph
        side = side[levels[i].mapping]
        side = fm_refine(fine, side, targets, eps, ub=ub, lb=lb, max_passes=max_passes)
        if trace is not None:
            trace.append((fine.n, fine.num_edges, fine.cut_weight(side)))
    return side


# -- recursive m-way partitioning -----------------------------------------


def partition(
    g: WeightedGraph,
    m: int,
    eps: float = DEFAULT_EPS,
    seed=0,
    trials: int = DEFAULT_TRIALS,
    max_passes: int = DEFAULT_MAX_PASSES,
) -> np.ndarray:
    """Recursive bisection into ``m`` parts with ids 0..m-1.

    A call responsible for m' parts splits its weight in ratio
    ceil(m'/2):floor(m'/2); per-side bounds m_side*(1+eps)*ceil(W/m) ride
    down the recursion so every final part obeys the global cap. Part ids
    are assigned in recursion order (left subtree first), so they are
    compact and deterministic.
    """
    if m < 1:
        raise UsageError(f"part count must be >= 1, got {m}")
    if m > g.n:
        raise UsageError(f"part count {m} exceeds vertex count {g.n}")
    labels = np.zeros(g.n, dtype=np.int64)
    if m == 1:
        return labels
    total = int(g.vertex_weights.sum())
    # integer per-part cap: a fractional cap would admit side weights that
    # no integer subdivision can satisfy (e.g. 127 for two parts capped at
    # 63.8); flooring keeps every recursion level's weight band non-empty
    cap = int(math.floor((1.0 + eps) * math.ceil(total / m) + 1e-9))
    counter = [0]

    def rec(sub: WeightedGraph, members: np.ndarray, parts: int, ss):
        if parts == 1:
            labels[members] = counter[0]
            counter[0] += 1
            return
        m0 = (parts + 1) // 2
        m1 = parts - m0
        w = int(sub.vertex_weights.sum())
        t0 = w * m0 / parts
        ub0 = min(m0 * cap, w - m1)
        ub1 = min(m1 * cap, w - m0)
        lb0 = max(w - ub1, m0)
        lb1 = max(w - ub0, m1)
        if lb0 > ub0 or lb1 > ub1:
            raise BalanceError(
                f"cannot split weight {w:g} into {m0}+{m1} parts under cap {cap:g}"
            )
        bisect_ss, left_ss, right_ss = ss.spawn(3)
        side = multilevel_bisect(
            sub, (t0, w - t0), eps, seed=bisect_ss,
            ub=(ub0, ub1), lb=(lb0, lb1), trials=trials, max_passes=max_passes,
        )
        left = np.flatnonzero(side == 0)
        right = np.flatnonzero(side == 1)
        if left.size < m0 or right.size < m1:
            raise BalanceError(
                f"bisection left {left.size}/{right.size} vertices for {m0}/{m1} parts"
            )
        sub_l, _ = sub.subgraph(left)
        sub_r, _ = sub.subgraph(right)
        rec(sub_l, members[left], m0, left_ss)
        rec(sub_r, members[right], m1, right_ss)

    root_ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    rec(g, np.arange(g.n, dtype=np.int64), m, root_ss)
    return labels
