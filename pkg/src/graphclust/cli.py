"""Command-line interface.

Subcommands: cluster (one run), sweep (12-combination k grid), recall
(approximate vs exact neighbors), scaling (synthetic timing curves), and
metrics (score two label files). Reports go to stdout as JSON; cluster
and sweep also write labels / dendrogram / report files under --output.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
import traceback

from . import metrics as metrics_mod
from .config import RunConfig
from .dataset import NORMALIZE_MODES, read_labels
from .errors import DataError, UsageError
from .pipeline import run_cluster, run_recall, run_scaling, run_sweep


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems through our exit-code scheme."""

    def error(self, message):
        raise UsageError(message)


def _label_column(value: str):
    if value == "last":
        return value
    return int(value)


def _sizes(value: str):
    sizes = [int(x) for x in value.split(",") if x.strip()]
    if not sizes:
        raise ValueError("empty size list")
    return sizes


def _add_data_flags(p, with_labels=True):
    p.add_argument("--data", required=True, help="CSV dataset path")
    if with_labels:
        p.add_argument(
            "--label-column", type=_label_column, default=None,
            help="ground-truth column: an index or 'last'",
        )
    p.add_argument("--normalize", choices=NORMALIZE_MODES, default="none")


def _add_param_flags(p, with_rb=True):
    if with_rb:
        p.add_argument("--r", type=int, default=2, help="neighbor scale factor")
        p.add_argument("--base", choices=("e", "10", "2"), default="2",
                       help="log base in k = ceil(r * log_base n)")
    p.add_argument("--k", type=int, default=None, help="override neighbor count")
    p.add_argument("--t", type=int, default=None, help="override tree count")
    p.add_argument("--l", type=int, default=None, help="override leaf size")
    p.add_argument("--search-k", type=int, default=None, help="candidate budget")
    p.add_argument("--seed", type=int, default=0)


def _add_cluster_flags(p):
    p.add_argument("--m", type=int, default=None, help="override partition count")
    p.add_argument("--eps", type=float, default=0.10, help="partition imbalance")
    p.add_argument("--alpha", type=float, default=2.0, help="R_CL exponent")
    p.add_argument("--beta", type=float, default=1.0, help="R_IC exponent")
    p.add_argument("--m-fact", type=float, default=1000.0,
                   help="similarity boost for tiny partitions")
    p.add_argument("--metric", choices=("nmi", "acc"), default="acc")
    p.add_argument("--output", default="run", help="output file prefix")


def build_parser() -> _Parser:
    parser = _Parser(prog="graphclust", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cluster", help="run the full pipeline once")
    _add_data_flags(p)
    _add_param_flags(p)
    _add_cluster_flags(p)
    p.add_argument("--mode", choices=("eval", "cut"), default="eval",
                   help="'eval' picks the best-metric stage; 'cut' a fixed K")
    p.add_argument("--K", type=int, default=None, help="cluster count for cut mode")

    p = sub.add_parser("sweep", help="all 12 (r, base) combinations, best wins")
    _add_data_flags(p)
    _add_param_flags(p, with_rb=False)
    _add_cluster_flags(p)

    p = sub.add_parser("recall", help="approximate vs exact k-NN recall")
    _add_data_flags(p)
    _add_param_flags(p)
    p.add_argument("--force", action="store_true",
                   help="run the exact oracle even on very large datasets")

    p = sub.add_parser("scaling", help="timing curves on synthetic blobs")
    p.add_argument("--sizes", type=_sizes, default=[10000, 20000, 40000],
                   help="comma-separated point counts")
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--centers", type=int, default=10)
    p.add_argument("--dim", type=int, default=16)
    p.add_argument("--output", default=None, help="also write the report here")

    p = sub.add_parser("metrics", help="score a predicted labels file")
    p.add_argument("truth", help="ground-truth labels, one integer per line")
    p.add_argument("predicted", help="predicted labels, one integer per line")

    return parser


def _config_from(args, mode=None, K=None) -> RunConfig:
    return RunConfig(
        data=args.data,
        label_column=getattr(args, "label_column", None),
        normalize=args.normalize,
        r=getattr(args, "r", 2),
        base=getattr(args, "base", "2"),
        k=args.k,
        t=args.t,
        l=args.l,
        search_k=args.search_k,
        m=getattr(args, "m", None),
        eps=getattr(args, "eps", 0.10),
        alpha=getattr(args, "alpha", 2.0),
        beta=getattr(args, "beta", 1.0),
        m_fact=getattr(args, "m_fact", 1000.0),
        seed=args.seed,
        mode=mode if mode is not None else "eval",
        K=K,
        metric=getattr(args, "metric", "acc"),
        output=getattr(args, "output", "run") or "run",
    )


def _emit(report) -> None:
    print(json.dumps(report, indent=2, sort_keys=True))


def _cmd_cluster(args) -> int:
    cfg = _config_from(args, mode=args.mode, K=args.K)
    _emit(run_cluster(cfg))
    return 0


def _cmd_sweep(args) -> int:
    cfg = _config_from(args)
    _emit(run_sweep(cfg))
    return 0


def _cmd_recall(args) -> int:
    _emit(run_recall(_config_from(args), force=args.force))
    return 0


def _cmd_scaling(args) -> int:
    report = run_scaling(
        args.sizes, repeats=args.repeats, seed=args.seed,
        centers=args.centers, dim=args.dim,
    )
    _emit(report)
    if args.output:
        with open(args.output, "w") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return 0


def _cmd_metrics(args) -> int:
    truth = read_labels(args.truth)
    pred = read_labels(args.predicted)
    report = {
        "nmi": float(metrics_mod.nmi(truth, pred)),
        "acc": float(metrics_mod.acc(truth, pred)),
        "n": int(truth.size),
        "K_true": int(truth.max()) + 1 if truth.size else 0,
        "K_pred": int(pred.max()) + 1 if pred.size else 0,
    }
    _emit(report)
    return 0


_COMMANDS = {
    "cluster": _cmd_cluster,
    "sweep": _cmd_sweep,
    "recall": _cmd_recall,
    "scaling": _cmd_scaling,
    "metrics": _cmd_metrics,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # final guard: anything else is an internal bug
        print(f"internal error: {exc}", file=sys.stderr)
        traceback.print_exc()
        return 3


if __name__ == "__main__":
    sys.exit(main())
