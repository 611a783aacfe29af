"""Hierarchical clustering on approximate k-NN graphs.

Pipeline: random-projection-forest k-NN graph, multilevel balanced graph
partitioning, flood-fill repair of disconnected parts, and agglomerative
merging by relative interconnectivity / closeness. See the CLI
(``graphclust``) for end-to-end runs.
"""

from .ann import build_forest, build_knn_graph, compute_k, exact_knn, query, recall
from .config import ResolvedParams, RunConfig, phase_seed, resolve
from .dataset import LabelVector, PointSet, load_csv, normalize
from .errors import BalanceError, DataError, GraphClustError, InternalError, UsageError
from .floodfill import split_disconnected
from .graph import WeightedGraph
from .merger import (
    Dendrogram,
    MergeParams,
    cut,
    merge_all,
    pair_stats,
    similarity,
)
from .metrics import acc, confusion, hungarian, nmi
from .partitioner import (
    coarsen,
    compute_m,
    fm_refine,
    initial_bisect,
    multilevel_bisect,
    partition,
)
from .pipeline import run_cluster, run_phases, run_recall, run_scaling, run_sweep
from .synth import gaussian_blobs

__version__ = "0.1.0"

__all__ = [
    "BalanceError",
    "DataError",
    "Dendrogram",
    "GraphClustError",
    "InternalError",
    "LabelVector",
    "MergeParams",
    "PointSet",
    "ResolvedParams",
    "RunConfig",
    "UsageError",
    "WeightedGraph",
    "acc",
    "build_forest",
    "build_knn_graph",
    "coarsen",
    "compute_k",
    "compute_m",
    "confusion",
    "cut",
    "exact_knn",
    "fm_refine",
    "gaussian_blobs",
    "hungarian",
    "initial_bisect",
    "load_csv",
    "merge_all",
    "multilevel_bisect",
    "nmi",
    "normalize",
    "pair_stats",
    "partition",
    "phase_seed",
    "query",
    "recall",
    "resolve",
    "run_cluster",
    "run_phases",
    "run_recall",
    "run_scaling",
    "run_sweep",
    "similarity",
    "split_disconnected",
]
