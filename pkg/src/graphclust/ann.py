"""Approximate k-nearest-neighbor search with a random-projection forest.

Each tree recursively splits the point set by the perpendicular bisector
of two randomly drawn points until every leaf holds at most ``l`` items.
Queries run a single best-first traversal over all trees, ordered by
hyperplane margin, and collect leaf candidates until the budget
``search_k`` distinct points have been seen; exact Euclidean distances
over the candidate set give the final top-k.

Also provides the brute-force exact k-NN used as a recall oracle, and the
weighted symmetrized k-NN graph that seeds the clustering pipeline.
"""

from __future__ import annotations

import heapq
import math
import struct
from dataclasses import dataclass

import numpy as np

from .dataset import PointSet
from .errors import DataError, UsageError
from .graph import WeightedGraph

LOG_FNS = {"e": math.log, "10": math.log10, "2": math.log2}


def compute_k(n: int, r: int, base: str | float = "2") -> int:
    """Neighbor count max(1, ceil(r * log_base(n))), capped at n - 1."""
    if n < 2:
        raise UsageError(f"need at least 2 points to define neighbors, got n={n}")
    if r < 1:
        raise UsageError(f"scale factor r must be a positive integer, got {r}")
    key = {math.e: "e", 10: "10", 10.0: "10", 2: "2", 2.0: "2"}.get(base, base)
    if key not in LOG_FNS:
        raise UsageError(f"log base must be one of e, 10, 2; got {base!r}")
    k = max(1, math.ceil(r * LOG_FNS[key](n)))
    return min(k, n - 1)


# -- forest ---------------------------------------------------------------


@dataclass
class RPTree:
    """One random-projection tree in flat preorder arrays.

    Internal node i splits on sign(x . normals[i] - offsets[i]); children[i]
    holds (left, right) node ids, (-1, -1) marks a leaf whose members are
    items[leaf_start[i]:leaf_end[i]]. A zero normal marks a random split
    (taken when anchor draws degenerate); its margin is 0 for every query.
    """

    normals: np.ndarray
    offsets: np.ndarray
    children: np.ndarray
    leaf_start: np.ndarray
    leaf_end: np.ndarray
    items: np.ndarray

    @property
    def n_nodes(self) -> int:
        return self.offsets.size


@dataclass
class RPForest:
    trees: list[RPTree]
    n: int
    d: int
    leaf_size: int
    seed: int

    @property
    def t(self) -> int:
        return len(self.trees)


def _split_subset(data, subset, rng, max_retries=20):
    """Split subset indices by a random perpendicular-bisector hyperplane.

    Retries degenerate draws (coincident anchors, or a side left empty);
    after ``max_retries`` failures falls back to a random halving with a
    zero normal.
    """
    m = subset.size
    for _ in range(max_retries):
        ia, ib = rng.choice(m, size=2, replace=False)
        a = data[subset[ia]]
        b = data[subset[ib]]
        normal = b - a
        if not normal.any():
            continue
        offset = float(normal @ ((a + b) * 0.5))
        margins = data[subset] @ normal - offset
        side = margins > 0
        ties = margins == 0
        if ties.any():
            side[ties] = rng.integers(0, 2, size=int(ties.sum())) == 1
        if side.all() or not side.any():
            continue
        return subset[~side], subset[side], normal, offset
    perm = rng.permutation(m)
    half = m // 2
    zero = np.zeros(data.shape[1], dtype=np.float64)
    return subset[perm[:half]], subset[perm[half:]], zero, 0.0


def _build_tree(data, leaf_size, rng) -> RPTree:
    normals: list[np.ndarray] = []
    offsets: list[float] = []
    children: list[list[int]] = []
    leaf_start: list[int] = []
    leaf_end: list[int] = []
    items: list[np.ndarray] = []
    n_items = 0
    zero = np.zeros(data.shape[1], dtype=np.float64)

    def new_node():
        normals.append(zero)
        offsets.append(0.0)
        children.append([-1, -1])
        leaf_start.append(-1)
        leaf_end.append(-1)
        return len(offsets) - 1

    root = new_node()
    stack = [(root, np.arange(data.shape[0], dtype=np.int64))]
    while stack:
        node, subset = stack.pop()
        if subset.size <= leaf_size:
            nonlocal_start = n_items
            items.append(subset)
            n_items += subset.size
            leaf_start[node] = nonlocal_start
            leaf_end[node] = n_items
            continue
        left_set, right_set, normal, offset = _split_subset(data, subset, rng)
        normals[node] = normal
        offsets[node] = offset
        left = new_node()
        right = new_node()
        children[node] = [left, right]
        # right pushed first so the left subtree is built first (preorder)
        stack.append((right, right_set))
        stack.append((left, left_set))
    return RPTree(
        normals=np.array(normals, dtype=np.float64),
        offsets=np.array(offsets, dtype=np.float64),
        children=np.array(children, dtype=np.int64),
        leaf_start=np.array(leaf_start, dtype=np.int64),
        leaf_end=np.array(leaf_end, dtype=np.int64),
        items=np.concatenate(items) if items else np.empty(0, dtype=np.int64),
    )


def build_forest(points: PointSet, t: int, l: int, seed=0) -> RPForest:
    """Build ``t`` independent random-projection trees with leaf size ``l``."""
    if t < 1:
        raise UsageError(f"tree count must be >= 1, got {t}")
    if l < 1:
        raise UsageError(f"leaf size must be >= 1, got {l}")
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    trees = [_build_tree(points.data, l, np.random.default_rng(s)) for s in ss.spawn(t)]
    seed_label = int(seed) if isinstance(seed, (int, np.integer)) else -1
    return RPForest(trees=trees, n=points.n, d=points.d, leaf_size=l, seed=seed_label)


def query(
    forest: RPForest,
    points: PointSet,
    q: np.ndarray,
    k: int,
    search_k: int | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Best-first search across all trees; returns (indices, distances) sorted
    ascending by exact Euclidean distance (ties broken by index).

    One shared max-priority queue is keyed by hyperplane margin: roots enter
    with infinite priority, the child on the query's side inherits
    min(parent, |margin|) and the far child min(parent, -|margin|). Leaves
    are drained until ``search_k`` distinct candidates are collected.
    """
    if k < 1:
        raise UsageError(f"k must be >= 1, got {k}")
    if k > forest.n:
        raise UsageError(f"k={k} exceeds point count {forest.n}")
    if search_k is None:
        search_k = forest.t * k
    if search_k < k:
        raise UsageError(f"search_k={search_k} must be at least k={k}")
    q = np.asarray(q, dtype=np.float64)

    seen = np.zeros(forest.n, dtype=bool)
    batches: list[np.ndarray] = []
    count = 0
    order = 0
    # entries: (-priority, insertion order, tree id, node id)
    heap = [(-math.inf, i, i, 0) for i in range(forest.t)]
    while heap and count < search_k:
        neg_pri, _, ti, node = heapq.heappop(heap)
        pri = -neg_pri
        tree = forest.trees[ti]
        left, right = tree.children[node]
        if left < 0:
            leaf = tree.items[tree.leaf_start[node] : tree.leaf_end[node]]
            novel = leaf[~seen[leaf]]
            if novel.size:
                seen[novel] = True
                batches.append(novel)
                count += novel.size
            continue
        margin = float(tree.normals[node] @ q) - float(tree.offsets[node])
        near, far = (left, right) if margin <= 0 else (right, left)
        amargin = abs(margin)
        order += 1
        heapq.heappush(heap, (-min(pri, amargin), order, ti, near))
        order += 1
        heapq.heappush(heap, (-min(pri, -amargin), order, ti, far))

    cands = np.concatenate(batches) if batches else np.empty(0, dtype=np.int64)
    delta = points.data[cands] - q
    d2 = (delta * delta).sum(axis=1)
    top = np.lexsort((cands, d2))[:k]
    return cands[top], np.sqrt(d2[top])


# -- k-NN lists and graphs ------------------------------------------------


def default_weight(dist: np.ndarray) -> np.ndarray:
    """Edge weight 1/(1+d): bounded in (0, 1], decreasing, finite at d=0."""
    return 1.0 / (1.0 + dist)


def knn_lists(
    points: PointSet,
    k: int,
    t: int | None = None,
    l: int | None = None,
    seed: int = 0,
    search_k: int | None = None,
    forest: RPForest | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Directed approximate k-NN lists (n x k index and distance arrays).

    Each point's own index is excluded. Defaults follow the forest
    conventions: t = k trees, leaf size l = k, search budget t*k.
    """
    if k >= points.n:
        raise UsageError(f"k={k} must be below point count {points.n}")
    if forest is None:
        forest = build_forest(points, t if t is not None else k, l if l is not None else k, seed)
    if search_k is None:
        search_k = forest.t * k
    budget = max(search_k, k + 1)
    nbrs = np.empty((points.n, k), dtype=np.int64)
    dists = np.empty((points.n, k), dtype=np.float64)
    for i in range(points.n):
        idx, dst = query(forest, points, points.data[i], k + 1, budget)
        keep = idx != i
        nbrs[i] = idx[keep][:k]
        dists[i] = dst[keep][:k]
    return nbrs, dists


def exact_knn_lists(points: PointSet, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Brute-force directed k-NN lists, same ordering rule as the forest path."""
    if k >= points.n:
        raise UsageError(f"k={k} must be below point count {points.n}")
    n, d = points.n, points.d
    nbrs = np.empty((n, k), dtype=np.int64)
    dists = np.empty((n, k), dtype=np.float64)
    all_idx = np.arange(n, dtype=np.int64)
    chunk = max(1, int(2**24 // (max(1, n * d))))
    for a in range(0, n, chunk):
        b = min(n, a + chunk)
        delta = points.data[a:b, None, :] - points.data[None, :, :]
        d2 = (delta * delta).sum(axis=-1)
        for row in range(a, b):
            keep = all_idx != row
            cand = all_idx[keep]
            cd2 = d2[row - a][keep]
            top = np.lexsort((cand, cd2))[:k]
            nbrs[row] = cand[top]
            dists[row] = np.sqrt(cd2[top])
    return nbrs, dists


def lists_to_graph(
    n: int, nbrs: np.ndarray, dists: np.ndarray, weight_fn=default_weight
) -> WeightedGraph:
    """Union-symmetrized weighted graph from directed neighbor lists."""
    k = nbrs.shape[1]
    src = np.repeat(np.arange(n, dtype=np.int64), k)
    dst = nbrs.ravel()
    w = weight_fn(dists.ravel())
    # an edge present in both directions carries identical weight; "max"
    # keeps that single value instead of doubling it
    return WeightedGraph.from_edges(n, src, dst, w, merge="max")


def build_knn_graph(
    points: PointSet,
    k: int,
    t: int | None = None,
    l: int | None = None,
    seed: int = 0,
    search_k: int | None = None,
    weight_fn=default_weight,
    forest: RPForest | None = None,
) -> WeightedGraph:
    """Approximate k-NN graph: union-symmetrized edges weighted by 1/(1+d)."""
    nbrs, dists = knn_lists(points, k, t=t, l=l, seed=seed, search_k=search_k, forest=forest)
    return lists_to_graph(points.n, nbrs, dists, weight_fn)


def exact_knn(points: PointSet, k: int, weight_fn=default_weight) -> WeightedGraph:
    """Brute-force k-NN graph with the same symmetrization and weighting."""
    nbrs, dists = exact_knn_lists(points, k)
    return lists_to_graph(points.n, nbrs, dists, weight_fn)


def recall(approx_nbrs: np.ndarray, exact_nbrs: np.ndarray, k: int) -> float:
    """Mean per-point overlap |approx top-k  ^  exact top-k| / k."""
    approx_nbrs = np.asarray(approx_nbrs)
    exact_nbrs = np.asarray(exact_nbrs)
    if approx_nbrs.shape != exact_nbrs.shape:
        raise DataError(
            f"neighbor list shapes differ: {approx_nbrs.shape} vs {exact_nbrs.shape}"
        )
    if approx_nbrs.shape[1] != k:
        raise DataError(f"neighbor lists have width {approx_nbrs.shape[1]}, expected {k}")
    hits = 0
    for row_a, row_e in zip(approx_nbrs, exact_nbrs):
        hits += np.isin(row_a, row_e, assume_unique=True).sum()
    return hits / float(approx_nbrs.shape[0] * k)


# -- persistence ----------------------------------------------------------

_MAGIC = b"RPFOREST"
_VERSION = 1


def save_forest(forest: RPForest, path) -> None:
    """Serialize a forest to a small versioned binary file."""
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<IQQQQq", _VERSION, forest.n, forest.d, forest.t,
                             forest.leaf_size, forest.seed))
        for tree in forest.trees:
            fh.write(struct.pack("<Q", tree.n_nodes))
            fh.write(tree.children.astype(np.int64).tobytes())
            fh.write(tree.offsets.astype(np.float64).tobytes())
            fh.write(tree.normals.astype(np.float64).tobytes())
            fh.write(tree.leaf_start.astype(np.int64).tobytes())
            fh.write(tree.leaf_end.astype(np.int64).tobytes())
            fh.write(struct.pack("<Q", tree.items.size))
            fh.write(tree.items.astype(np.int64).tobytes())


def load_forest(path) -> RPForest:
    """Load a forest written by save_forest; rejects wrong magic or version."""
    with open(path, "rb") as fh:
        magic = fh.read(len(_MAGIC))
        if magic != _MAGIC:
            raise DataError(f"{path}: not a forest file")
        version, n, d, t, leaf_size, seed = struct.unpack("<IQQQQq", fh.read(44))
        if version != _VERSION:
            raise DataError(f"{path}: unsupported forest version {version}")
        trees = []
        for _ in range(t):
            (n_nodes,) = struct.unpack("<Q", fh.read(8))
            children = np.frombuffer(fh.read(16 * n_nodes), dtype=np.int64).reshape(n_nodes, 2)
            offsets = np.frombuffer(fh.read(8 * n_nodes), dtype=np.float64)
            normals = np.frombuffer(fh.read(8 * n_nodes * d), dtype=np.float64).reshape(n_nodes, d)
            leaf_start = np.frombuffer(fh.read(8 * n_nodes), dtype=np.int64)
            leaf_end = np.frombuffer(fh.read(8 * n_nodes), dtype=np.int64)
            (n_items,) = struct.unpack("<Q", fh.read(8))
            items = np.frombuffer(fh.read(8 * n_items), dtype=np.int64)
            trees.append(RPTree(normals.copy(), offsets.copy(), children.copy(),
                                leaf_start.copy(), leaf_end.copy(), items.copy()))
    return RPForest(trees=trees, n=n, d=d, leaf_size=leaf_size, seed=seed)
