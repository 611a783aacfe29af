"""Undirected weighted graphs in CSR form.

The same structure carries the k-NN graph, coarsened graphs, and induced
subgraphs. Adjacency is stored symmetrically (both directions), rows are
sorted by neighbor index, self-loops are forbidden, and parallel edges are
merged by weight sum at construction.
"""

from __future__ import annotations

import numpy as np

from .errors import DataError


class WeightedGraph:
    """Symmetric weighted adjacency over ``n`` vertices with integer vertex weights."""

    __slots__ = ("n", "indptr", "indices", "weights", "vertex_weights", "_rows")

    def __init__(self, n, indptr, indices, weights, vertex_weights=None):
        self.n = int(n)
        self.indptr = np.asarray(indptr, dtype=np.int64)
        self.indices = np.asarray(indices, dtype=np.int64)
        self.weights = np.asarray(weights, dtype=np.float64)
        if vertex_weights is None:
            vertex_weights = np.ones(self.n, dtype=np.int64)
        self.vertex_weights = np.asarray(vertex_weights, dtype=np.int64)
        self._rows = None

    # -- construction ----------------------------------------------------

    @classmethod
    def from_edges(cls, n, u, v, w, vertex_weights=None, merge="sum"):
        """Build from undirected edge arrays; (u,v) and (v,u) refer to the same edge.

        Self-loops are dropped. Duplicate edges are merged by ``merge``:
        "sum" adds their weights, "max" keeps the largest.
        """
        u = np.asarray(u, dtype=np.int64)
        v = np.asarray(v, dtype=np.int64)
        w = np.asarray(w, dtype=np.float64)
        if not (u.shape == v.shape == w.shape):
            raise DataError("edge arrays must have equal length")
        if u.size and (u.min() < 0 or v.min() < 0 or max(u.max(), v.max()) >= n):
            raise DataError("edge endpoint out of range")
        keep = u != v
        u, v, w = u[keep], v[keep], w[keep]
        lo = np.minimum(u, v)
        hi = np.maximum(u, v)
        if lo.size:
            key = lo * np.int64(n) + hi
            order = np.argsort(key, kind="stable")
            key, lo, hi, w = key[order], lo[order], hi[order], w[order]
            uniq, inverse = np.unique(key, return_inverse=True)
            if merge == "sum":
                wm = np.bincount(inverse, weights=w, minlength=uniq.size)
            elif merge == "max":
                wm = np.full(uniq.size, -np.inf)
                np.maximum.at(wm, inverse, w)
            else:
                raise ValueError(f"unknown merge rule {merge!r}")
            first = np.searchsorted(inverse, np.arange(uniq.size), side="left")
            lo, hi = lo[first], hi[first]
            w = wm
        # mirror into both directions and build CSR
        src = np.concatenate([lo, hi])
        dst = np.concatenate([hi, lo])
        ww = np.concatenate([w, w])
        order = np.lexsort((dst, src))
        src, dst, ww = src[order], dst[order], ww[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(indptr, src + 1, 1)
        np.cumsum(indptr, out=indptr)
        return cls(n, indptr, dst, ww, vertex_weights)

    # -- views -----------------------------------------------------------

    def neighbors(self, v):
        """Neighbor indices and edge weights of vertex ``v`` (views, sorted)."""
        a, b = self.indptr[v], self.indptr[v + 1]
        return self.indices[a:b], self.weights[a:b]

    def degree(self, v) -> int:
        return int(self.indptr[v + 1] - self.indptr[v])

    @property
    def rows(self) -> np.ndarray:
        """Row index of each CSR entry (cached)."""
        if self._rows is None:
            self._rows = np.repeat(
                np.arange(self.n, dtype=np.int64), np.diff(self.indptr)
            )
        return self._rows

    @property
    def num_edges(self) -> int:
        """Number of undirected edges."""
        return self.indices.size // 2

    def edge_list(self):
        """Canonical undirected edges as (u, v, w) arrays with u < v."""
        mask = self.rows < self.indices
        return self.rows[mask], self.indices[mask], self.weights[mask]

    def total_edge_weight(self) -> float:
        return float(self.weights.sum() / 2.0)

    def min_edge_weight(self, default: float = 1.0) -> float:
        """Smallest edge weight, or ``default`` for an edgeless graph."""
        return float(self.weights.min()) if self.weights.size else default

    # -- derived quantities ---------------------------------------------

    def cut_weight(self, part: np.ndarray) -> float:
        """Total weight of edges whose endpoints lie in different parts."""
        part = np.asarray(part)
        mask = part[self.rows] != part[self.indices]
        return float(self.weights[mask].sum() / 2.0)

    def cut_stats(self, part: np.ndarray) -> tuple[float, int]:
        """(total weight, edge count) of edges crossing between parts."""
        part = np.asarray(part)
        u, v, w = self.edge_list()
        mask = part[u] != part[v]
        return float(w[mask].sum()), int(mask.sum())

    def subgraph(self, members: np.ndarray) -> tuple["WeightedGraph", np.ndarray]:
        """Induced subgraph on ``members`` plus the old-id array in new-id order."""
        members = np.asarray(members, dtype=np.int64)
        lookup = np.full(self.n, -1, dtype=np.int64)
        lookup[members] = np.arange(members.size)
        starts = self.indptr[members]
        ends = self.indptr[members + 1]
        counts = ends - starts
        # gather the adjacency slices of all members in one shot
        gather = _multi_arange(starts, counts)
        nbr = self.indices[gather]
        wts = self.weights[gather]
        new_nbr = lookup[nbr]
        keep = new_nbr >= 0
        src = np.repeat(np.arange(members.size, dtype=np.int64), counts)[keep]
        dst = new_nbr[keep]
        ww = wts[keep]
        indptr = np.zeros(members.size + 1, dtype=np.int64)
        np.add.at(indptr, src + 1, 1)
        np.cumsum(indptr, out=indptr)
        sub = WeightedGraph(members.size, indptr, dst, ww, self.vertex_weights[members])
        return sub, members

    def equals(self, other: "WeightedGraph") -> bool:
        """Exact structural and weight equality."""
        return (
            self.n == other.n
            and np.array_equal(self.indptr, other.indptr)
            and np.array_equal(self.indices, other.indices)
            and np.array_equal(self.weights, other.weights)
            and np.array_equal(self.vertex_weights, other.vertex_weights)
        )

    def scaled(self, factor: float) -> "WeightedGraph":
        """Copy with every edge weight multiplied by ``factor``."""
        return WeightedGraph(
            self.n, self.indptr, self.indices, self.weights * factor, self.vertex_weights
        )

    def validate(self) -> None:
        """Check symmetry, positivity, and absence of self-loops (test helper)."""
        if np.any(self.rows == self.indices):
            raise DataError("self-loop present")
        if self.weights.size and self.weights.min() <= 0:
            raise DataError("non-positive edge weight")
        # symmetry: the multiset of (u,v) equals the multiset of (v,u)
        fwd = np.lexsort((self.indices, self.rows))
        rev = np.lexsort((self.rows, self.indices))
        if not (
            np.array_equal(self.rows[fwd], self.indices[rev])
            and np.array_equal(self.indices[fwd], self.rows[rev])
            and np.array_equal(self.weights[fwd], self.weights[rev])
        ):
            raise DataError("asymmetric adjacency")


def _multi_arange(starts: np.ndarray, counts: np.ndarray) -> np.ndarray:
    """Concatenation of arange(s, s+c) for each (s, c) pair, vectorized."""
    nonempty = counts > 0
    starts = np.asarray(starts, dtype=np.int64)[nonempty]
    counts = np.asarray(counts, dtype=np.int64)[nonempty]
    if starts.size == 0:
        return np.empty(0, dtype=np.int64)
    ends = np.cumsum(counts)
    out = np.ones(ends[-1], dtype=np.int64)
    out[0] = starts[0]
    # at each block boundary, jump from the previous block's last value
    out[ends[:-1]] = starts[1:] - (starts[:-1] + counts[:-1] - 1)
    np.cumsum(out, out=out)
    return out
