"""Agglomerative merging of graph partitions by relative
interconnectivity and closeness.

Every cluster carries internal stats from bisecting its own induced
subgraph: IC is the bisection's crossing weight and ICL the mean crossing
edge weight. A candidate pair scores

    S = R_CL^alpha * R_IC^beta,
    R_IC = EC / ((IC_i + IC_j) / 2),
    R_CL = CL / (size-weighted mean of ICL_i, ICL_j),

where EC/CL summarize the edges joining the pair. Clusters too small to
bisect are "tiny" and get their similarity boosted by m_fact so fragments
are absorbed early. Merging is greedy on a lazy max-heap; clusters with no
connecting edges are joined last by nearest centroids (S = 0) so the
dendrogram always completes.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError
from .graph import WeightedGraph, _multi_arange
from .metrics import acc, nmi
from .partitioner import DEFAULT_EPS, multilevel_bisect

MIN_BISECT_SIZE = 4


@dataclass
class MergeParams:
    alpha: float = 2.0      # exponent on R_CL
    beta: float = 1.0       # exponent on R_IC
    m_fact: float = 1000.0  # similarity boost for tiny clusters
    min_bisect_size: int = MIN_BISECT_SIZE

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise DataError("alpha and beta must be non-negative")
        if self.m_fact < 1:
            raise DataError("m_fact must be >= 1")


@dataclass
class ClusterState:
    members: np.ndarray  # sorted original vertex ids
    ic: float
    icl: float
    tiny: bool

    @property
    def size(self) -> int:
        return self.members.size


@dataclass
class PairStats:
    ec: float
    cl: float
    edge_count: int


@dataclass
class MergeRecord:
    step: int
    a: int
    b: int
    score: float
    new_id: int
    live: int


@dataclass
class Dendrogram:
    initial: np.ndarray
    records: list[MergeRecord] = field(default_factory=list)
    metric_name: str | None = None
    metrics: list[float] | None = None  # metrics[s] = score after s merges
    best_step: int | None = None
    best_metric: float | None = None

    @property
    def n_initial(self) -> int:
        return int(self.initial.max()) + 1 if self.initial.size else 0


def internal_stats(
    g: WeightedGraph,
    members: np.ndarray,
    params: MergeParams | None = None,
    min_weight: float | None = None,
    seed=0,
) -> tuple[float, float, bool]:
    """(IC, ICL, tiny) for one cluster.

    IC/ICL come from a balanced bisection of the induced subgraph. Below
    min_bisect_size, or when the bisection crosses nothing (cluster not
    connected), fall back to the subgraph's mean edge weight — or the
    graph-wide minimum edge weight if the subgraph has no edges at all.
    """
    if params is None:
        params = MergeParams()
    if min_weight is None:
        min_weight = g.min_edge_weight()
    sub, _ = g.subgraph(np.asarray(members, dtype=np.int64))
    if sub.n >= params.min_bisect_size:
        w = float(sub.vertex_weights.sum())
        side = multilevel_bisect(sub, (w / 2.0, w / 2.0), DEFAULT_EPS, seed=seed)
        cut_w, cut_n = sub.cut_stats(side)
        if cut_n > 0:
            return cut_w, cut_w / cut_n, False
    if sub.num_edges > 0:
        mean_w = sub.total_edge_weight() / sub.num_edges
        return mean_w, mean_w, True
    return min_weight, min_weight, True


def pair_stats(g: WeightedGraph, ci: np.ndarray, cj: np.ndarray) -> PairStats:
    """EC / CL / edge count over the edges joining two disjoint clusters.

    The adjacency of the smaller cluster (ties: lower first vertex id) is
    scanned, so the summation order — and hence the float result — is
    identical no matter which argument comes first.
    """
    ci = np.asarray(ci, dtype=np.int64)
    cj = np.asarray(cj, dtype=np.int64)
    if (ci.size, int(ci[0]) if ci.size else -1) <= (cj.size, int(cj[0]) if cj.size else -1):
        scan, other = ci, cj
    else:
        scan, other = cj, ci
    in_other = np.zeros(g.n, dtype=bool)
    in_other[other] = True
    starts = g.indptr[scan]
    counts = g.indptr[scan + 1] - starts
    gather = _multi_arange(starts, counts)
    hit = in_other[g.indices[gather]]
    ec = float(g.weights[gather][hit].sum())
    edge_count = int(hit.sum())
    cl = ec / edge_count if edge_count else 0.0
    return PairStats(ec=ec, cl=cl, edge_count=edge_count)


def similarity(si: ClusterState, sj: ClusterState, ps: PairStats, params: MergeParams) -> float:
    """S = R_CL^alpha * R_IC^beta, boosted by m_fact if either side is tiny.

    Zero when the pair shares no edges. Commutative arithmetic only, so
    the score is bit-identical under argument swap.
    """
    if ps.edge_count == 0:
        return 0.0
    r_ic = ps.ec / ((si.ic + sj.ic) / 2.0)
    total = si.size + sj.size
    r_cl = ps.cl / ((si.size * si.icl + sj.size * sj.icl) / total)
    s = r_cl ** params.alpha * r_ic ** params.beta
    if si.tiny or sj.tiny:
        s *= params.m_fact
    return s


def _first_occurrence_relabel(labels: np.ndarray) -> np.ndarray:
    uniq, first, inverse = np.unique(labels, return_index=True, return_inverse=True)
    rank = np.empty(uniq.size, dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(uniq.size)
    return rank[inverse]


def merge_all(
    g: WeightedGraph,
    p: np.ndarray,
    params: MergeParams | None = None,
    truth: np.ndarray | None = None,
    metric: str = "acc",
    seed=0,
    points: np.ndarray | None = None,
) -> Dendrogram:
    """Greedy agglomeration of a flood-filled partition into a dendrogram.

    Pairs live in one max-heap keyed by (-S, idA, idB); entries naming a
    dead cluster are skipped on pop (stats of surviving clusters never go
    stale, because a merge only touches the merged pair). New clusters get
    ids P, P+1, ... in merge order. With ``truth`` given, the chosen metric
    is evaluated at every stage and the argmax stage recorded. ``points``
    enables the nearest-centroid fallback for edge-disconnected clusters;
    without it the lowest-id pair is joined.
    """
    p = np.asarray(p, dtype=np.int64)
    if p.size == 0:
        raise DataError("empty partition")
    if p.size != g.n:
        raise DataError(f"partition length {p.size} does not match n={g.n}")
    if params is None:
        params = MergeParams()
    if metric not in ("nmi", "acc"):
        raise DataError(f"unknown metric {metric!r}")
    if truth is not None and len(truth) != g.n:
        raise DataError("ground-truth length does not match n")

    p = _first_occurrence_relabel(p)
    n_parts = int(p.max()) + 1
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    min_w = g.min_edge_weight()
    eval_metric = nmi if metric == "nmi" else acc

    # initial cluster states, one per part
    order = np.argsort(p, kind="stable")
    bounds = np.searchsorted(p[order], np.arange(n_parts + 1))
    states: dict[int, ClusterState] = {}
    for pid in range(n_parts):
        members = np.sort(order[bounds[pid] : bounds[pid + 1]])
        ic, icl, tiny = internal_stats(g, members, params, min_w, seed=ss.spawn(1)[0])
        states[pid] = ClusterState(members=members, ic=ic, icl=icl, tiny=tiny)

    if points is not None:
        points = np.asarray(points, dtype=np.float64)
        sums = {pid: points[st.members].sum(axis=0) for pid, st in states.items()}

    # adjacency between parts, then one heap entry per adjacent pair
    eu, ev, _ = g.edge_list()
    pa, pb = p[eu], p[ev]
    cross = pa != pb
    lo = np.minimum(pa[cross], pb[cross])
    hi = np.maximum(pa[cross], pb[cross])
    keys = np.unique(lo * np.int64(n_parts) + hi)
    nbrs: dict[int, set[int]] = {pid: set() for pid in states}
    heap: list[tuple[float, int, int]] = []
    for key in keys:
        a, b = int(key) // n_parts, int(key) % n_parts
        nbrs[a].add(b)
        nbrs[b].add(a)
        ps = pair_stats(g, states[a].members, states[b].members)
        heap.append((-similarity(states[a], states[b], ps, params), a, b))
    heapq.heapify(heap)

    dend = Dendrogram(initial=p.copy(), metric_name=metric if truth is not None else None)
    cur_label = p.copy()
    if truth is not None:
        dend.metrics = [float(eval_metric(truth, cur_label))]

    step = 0
    live = n_parts
    next_id = n_parts
    while live > 1:
        pick = None
        score = 0.0
        while heap:
            neg_s, a, b = heapq.heappop(heap)
            if a in states and b in states:
                pick, score = (a, b), -neg_s
                break
        if pick is None:
            # no edge joins any two remaining clusters
            pick = _fallback_pair(states, sums if points is not None else None)
        a, b = pick
        sa, sb = states.pop(a), states.pop(b)
        members = np.concatenate([sa.members, sb.members])
        members.sort()
        cid = next_id
        next_id += 1
        live -= 1
        step += 1
        dend.records.append(
            MergeRecord(step=step, a=a, b=b, score=score, new_id=cid, live=live)
        )
        cur_label[members] = cid
        if truth is not None:
            dend.metrics.append(float(eval_metric(truth, cur_label)))

        if score > 0.0:
            ic, icl, tiny = internal_stats(g, members, params, min_w, seed=ss.spawn(1)[0])
        else:
            # edge-disconnected union: nothing downstream reads real stats
            ic, icl, tiny = min_w, min_w, True
        st = ClusterState(members=members, ic=ic, icl=icl, tiny=tiny)
        states[cid] = st
        if points is not None:
            sums[cid] = sums.pop(a) + sums.pop(b)
        fresh = {x for x in nbrs.pop(a) | nbrs.pop(b) if x in states}
        nbrs[cid] = fresh
        for x in sorted(fresh):
            nbrs[x].add(cid)
            ps = pair_stats(g, st.members, states[x].members)
            heapq.heappush(heap, (-similarity(st, states[x], ps, params), x, cid))

    if truth is not None:
        best = int(np.argmax(dend.metrics))
        dend.best_step = best
        dend.best_metric = dend.metrics[best]
    return dend


def _fallback_pair(states, sums):
    """Pair to merge when no edges remain between clusters: nearest
    centroids when coordinates are known, else the two lowest ids."""
    ids = sorted(states)
    if sums is None:
        return ids[0], ids[1]
    best = None
    for i, a in enumerate(ids):
        ca = sums[a] / states[a].size
        for b in ids[i + 1 :]:
            cb = sums[b] / states[b].size
            delta = ca - cb
            key = (float(delta @ delta), a, b)
            if best is None or key < best:
                best = key
    return best[1], best[2]


def cut(d: Dendrogram, K: int) -> np.ndarray:
    """Flat labels with exactly K clusters, replaying P - K merges.

    Labels are compacted to 0..K-1 in first-occurrence order over points.
    """
    P = d.n_initial
    if K < 1 or K > P:
        raise DataError(f"K={K} outside valid range 1..{P}")
    steps = P - K
    if steps > len(d.records):
        raise DataError(
            f"K={K} needs {steps} merges but only {len(d.records)} were recorded"
        )
    part_cluster = np.arange(P, dtype=np.int64)
    for rec in d.records[:steps]:
        part_cluster[(part_cluster == rec.a) | (part_cluster == rec.b)] = rec.new_id
    return _first_occurrence_relabel(part_cluster[d.initial])


def labels_at_step(d: Dendrogram, step: int) -> np.ndarray:
    """Labels after ``step`` merges (step 0 = the initial partition)."""
    return cut(d, d.n_initial - step)


def best_labels(d: Dendrogram) -> np.ndarray:
    """Labels at the metric-argmax stage (requires eval mode)."""
    if d.best_step is None:
        raise DataError("dendrogram was built without ground truth")
    return labels_at_step(d, d.best_step)


def write_dendrogram(d: Dendrogram, path) -> None:
    """Line-oriented export: step, merged pair, S, optional metric (TSV)."""
    with open(path, "w") as fh:
        for i, rec in enumerate(d.records):
            cols = [str(rec.step), str(rec.a), str(rec.b), repr(float(rec.score))]
            if d.metrics is not None:
                cols.append(repr(float(d.metrics[i + 1])))
            fh.write("\t".join(cols) + "\n")


def summary(d: Dendrogram) -> dict:
    """JSON-ready digest of a merge run."""
    out = {
        "initial_parts": d.n_initial,
        "merges": len(d.records),
        "metric": d.metric_name,
        "best_step": d.best_step,
        "best_metric": d.best_metric,
    }
    if d.best_step is not None:
        out["best_k"] = d.n_initial - d.best_step
    return out
