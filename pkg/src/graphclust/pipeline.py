"""End-to-end orchestration: graph generation, partitioning, flood-fill,
merging, plus the sweep / recall / scaling harnesses behind the CLI.

Reports are plain dicts with stable keys, JSON-serializable as-is. Labels
and dendrogram exports are byte-reproducible for a fixed master seed;
reports carry wall times and are not.
"""

from __future__ import annotations

import statistics
import time
from dataclasses import dataclass, field

import numpy as np

from . import ann, floodfill, merger, metrics, partitioner
from .config import (
    PHASE_FOREST,
    PHASE_MERGE,
    PHASE_PARTITION,
    PHASE_SWEEP,
    PHASE_SYNTH,
    SWEEP_BASES,
    SWEEP_R,
    ResolvedParams,
    RunConfig,
    phase_seed,
    resolve,
)
from .dataset import PointSet, load_csv, normalize, write_labels
from .errors import DataError, UsageError
from .merger import MergeParams
from .synth import gaussian_blobs


def _now_ms() -> float:
    return time.monotonic() * 1000.0


@dataclass
class PhaseResult:
    graph: object
    partition: np.ndarray
    flooded: np.ndarray
    dendrogram: merger.Dendrogram
    times_ms: dict = field(default_factory=dict)


def run_phases(
    points: PointSet,
    rp: ResolvedParams,
    truth: np.ndarray | None = None,
    metric: str = "acc",
) -> PhaseResult:
    """The four pipeline phases with per-phase wall times (ms).

    ``truth`` switches the merger into eval mode (metric tracked at every
    stage); leave it None for timing-sensitive runs.
    """
    t0 = _now_ms()
    g = ann.build_knn_graph(
        points, rp.k, t=rp.t, l=rp.l,
        seed=phase_seed(rp.seed, PHASE_FOREST), search_k=rp.search_k,
    )
    t1 = _now_ms()
    part = partitioner.partition(
        g, rp.m, eps=rp.eps, seed=phase_seed(rp.seed, PHASE_PARTITION)
    )
    t2 = _now_ms()
    flooded = floodfill.split_disconnected(g, part)
    t3 = _now_ms()
    params = MergeParams(alpha=rp.alpha, beta=rp.beta, m_fact=rp.m_fact)
    dend = merger.merge_all(
        g, flooded, params, truth=truth, metric=metric,
        seed=phase_seed(rp.seed, PHASE_MERGE), points=points.data,
    )
    t4 = _now_ms()
    return PhaseResult(
        graph=g, partition=part, flooded=flooded, dendrogram=dend,
        times_ms={
            "graph": t1 - t0,
            "partition": t2 - t1,
            "floodfill": t3 - t2,
            "merge": t4 - t3,
        },
    )


def _load(cfg: RunConfig) -> tuple[PointSet, np.ndarray | None]:
    points, truth = load_csv(cfg.data, label_column=cfg.label_column)
    points = normalize(points, cfg.normalize)
    return points, truth


def _score_labels(truth, labels) -> dict:
    return {
        "nmi": float(metrics.nmi(truth, labels)),
        "acc": float(metrics.acc(truth, labels)),
    }


def run_cluster(cfg: RunConfig, write: bool = True) -> dict:
    """One clustering run; returns the report and optionally writes
    <output>.labels, <output>.dendrogram.tsv, <output>.report.json."""
    points, truth = _load(cfg)
    rp = resolve(cfg, points.n, points.d)
    if cfg.mode == "eval":
        if truth is None:
            raise DataError("eval mode needs a labeled dataset (--label-column)")
        result = run_phases(points, rp, truth=truth, metric=cfg.metric)
        labels = merger.best_labels(result.dendrogram)
    else:
        result = run_phases(points, rp, truth=None)
        labels = merger.cut(result.dendrogram, cfg.K)

    report = {
        "params": rp.to_dict(),
        "mode": cfg.mode,
        "phase_ms": result.times_ms,
        "parts_initial": int(result.partition.max()) + 1,
        "parts_flooded": int(result.flooded.max()) + 1,
        "dendrogram": merger.summary(result.dendrogram),
        "clusters_emitted": int(labels.max()) + 1,
        "metrics": _score_labels(truth, labels) if truth is not None else None,
    }
    if write:
        paths = _write_outputs(cfg.output, labels, result.dendrogram, report)
        report["outputs"] = paths
    return report


def _write_outputs(prefix, labels, dend, report) -> dict:
    import json

    labels_path = f"{prefix}.labels"
    dendro_path = f"{prefix}.dendrogram.tsv"
    report_path = f"{prefix}.report.json"
    write_labels(labels_path, labels)
    merger.write_dendrogram(dend, dendro_path)
    with open(report_path, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return {"labels": labels_path, "dendrogram": dendro_path, "report": report_path}


def run_sweep(cfg: RunConfig, write: bool = True) -> dict:
    """All 12 (r, base) combinations, best row by the chosen metric.

    Rows are ordered r-major / base-minor; each combo runs under its own
    child seed so combos stay independent. Ties go to the earliest row.
    """
    points, truth = _load(cfg)
    if truth is None:
        raise DataError("sweep needs a labeled dataset (--label-column)")
    combo_seeds = [
        int(s) for s in phase_seed(cfg.seed, PHASE_SWEEP).generate_state(
            len(SWEEP_R) * len(SWEEP_BASES)
        )
    ]
    rows = []
    best = None
    seen_k: dict[int, int] = {}
    for i, (r, base) in enumerate(
        (r, base) for r in SWEEP_R for base in SWEEP_BASES
    ):
        k = ann.compute_k(points.n, r, base)
        rp = resolve(
            RunConfig(
                data=cfg.data, normalize=cfg.normalize, r=r, base=base,
                m=cfg.m, eps=cfg.eps, alpha=cfg.alpha, beta=cfg.beta,
                m_fact=cfg.m_fact, seed=combo_seeds[i], metric=cfg.metric,
            ),
            points.n, points.d,
        )
        t0 = _now_ms()
        result = run_phases(points, rp, truth=truth, metric=cfg.metric)
        elapsed = _now_ms() - t0
        dend = result.dendrogram
        row = {
            "r": r,
            "base": base,
            "k": k,
            "seed": combo_seeds[i],
            "parts_flooded": int(result.flooded.max()) + 1,
            "best_metric": dend.best_metric,
            "best_k": dend.n_initial - dend.best_step,
            "duplicate_k_of": seen_k.get(k),
            "total_ms": elapsed,
        }
        seen_k.setdefault(k, i)
        rows.append(row)
        if best is None or row["best_metric"] > best[0]["best_metric"]:
            best = (row, result)

    best_row, best_result = best
    labels = merger.best_labels(best_result.dendrogram)
    report = {
        "metric": cfg.metric,
        "n": points.n,
        "d": points.d,
        "normalize": cfg.normalize,
        "grid": rows,
        "best": dict(best_row),
        "best_scores": _score_labels(truth, labels),
        "clusters_emitted": int(labels.max()) + 1,
    }
    if write:
        paths = _write_outputs(cfg.output, labels, best_result.dendrogram, report)
        report["outputs"] = paths
    return report


RECALL_HARD_CAP = 100000
RECALL_WARN_AT = 20000


def run_recall(cfg: RunConfig, force: bool = False) -> dict:
    """Approximate-vs-exact neighbor recall on one dataset."""
    points, _ = _load(cfg)
    if points.n > RECALL_HARD_CAP and not force:
        raise UsageError(
            f"n={points.n} exceeds the exact-oracle cap {RECALL_HARD_CAP}; "
            "pass --force to run anyway"
        )
    rp = resolve(cfg, points.n, points.d)
    t0 = _now_ms()
    forest = ann.build_forest(points, rp.t, rp.l, seed=phase_seed(rp.seed, PHASE_FOREST))
    approx, _ = ann.knn_lists(points, rp.k, search_k=rp.search_k, forest=forest)
    t1 = _now_ms()
    exact, _ = ann.exact_knn_lists(points, rp.k)
    t2 = _now_ms()
    return {
        "n": points.n,
        "d": points.d,
        "k": rp.k,
        "t": rp.t,
        "l": rp.l,
        "search_k": rp.search_k,
        "recall": ann.recall(approx, exact, rp.k),
        "approx_ms": t1 - t0,
        "exact_ms": t2 - t1,
        "warning": (
            f"n={points.n} above {RECALL_WARN_AT}; exact oracle is slow"
            if points.n > RECALL_WARN_AT
            else None
        ),
    }


def run_scaling(
    sizes: list[int],
    repeats: int = 3,
    seed: int = 0,
    centers: int = 10,
    dim: int = 16,
) -> dict:
    """Wall-time growth of graph generation and the full pipeline.

    Each size gets its own deterministic blob dataset; per-size times are
    medians over ``repeats`` identical runs. Ratio rows compare
    consecutive sizes.
    """
    if not sizes:
        raise UsageError("need at least one size")
    rows = []
    for n in sizes:
        pts, _ = gaussian_blobs(
            n, centers=centers, d=dim,
            seed=np.random.SeedSequence((seed, PHASE_SYNTH, n)),
        )
        rp = resolve(RunConfig(data="<synthetic>", seed=seed, mode="cut", K=centers),
                     pts.n, pts.d)
        graph_times, pipe_times = [], []
        for _ in range(max(1, repeats)):
            result = run_phases(pts, rp, truth=None)
            graph_times.append(result.times_ms["graph"])
            pipe_times.append(sum(result.times_ms.values()))
        rows.append({
            "n": n,
            "k": rp.k,
            "m": rp.m,
            "graph_ms": statistics.median(graph_times),
            "pipeline_ms": statistics.median(pipe_times),
            "graph_ms_runs": graph_times,
            "pipeline_ms_runs": pipe_times,
        })
    ratios = []
    for prev, cur in zip(rows, rows[1:]):
        ratios.append({
            "from_n": prev["n"],
            "to_n": cur["n"],
            "graph_ratio": cur["graph_ms"] / prev["graph_ms"],
            "pipeline_ratio": cur["pipeline_ms"] / prev["pipeline_ms"],
        })
    return {"sizes": rows, "ratios": ratios, "repeats": repeats, "seed": seed}
