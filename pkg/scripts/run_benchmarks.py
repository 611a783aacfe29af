#!/usr/bin/env python3
"""Run the full benchmark table on every dataset present in data/.

For each labeled CSV this sweeps the 12 (r, base) neighbor-count
combinations and reports the best stage-picked score, then (optionally)
times the synthetic scaling curve. Datasets are fetched separately by
scripts/fetch_datasets.py; absent files are listed and skipped.

    python3 scripts/run_benchmarks.py
    python3 scripts/run_benchmarks.py --only iris seeds --seed 3
    python3 scripts/run_benchmarks.py --scaling 10000,20000,40000
"""

import argparse
import json
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from graphclust.config import RunConfig            # noqa: E402
from graphclust.pipeline import run_scaling, run_sweep  # noqa: E402

DATA_DIR = Path(__file__).resolve().parents[1] / "data"

# dataset -> headline metric (accuracy unless stated otherwise)
BENCHMARKS = {
    "iris": "acc",
    "wireless": "acc",
    "seeds": "acc",
    "soybean": "acc",
    "pendigits": "nmi",
}


def sweep_one(name, metric, seed, out_dir):
    path = DATA_DIR / f"{name}.csv"
    cfg = RunConfig(
        data=str(path), label_column="last", metric=metric, seed=seed,
        output=str(out_dir / name),
    )
    t0 = time.monotonic()
    report = run_sweep(cfg)
    elapsed = time.monotonic() - t0
    best = report["best"]
    print(f"{name:<12} n={report['n']:<6} {metric}={best['best_metric']:.4f} "
          f"(r={best['r']}, base={best['base']}, k={best['k']}, "
          f"K={best['best_k']})  [{elapsed:.1f}s]")
    return report


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--only", nargs="*", choices=sorted(BENCHMARKS))
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--scaling", type=str, default=None,
                    help="comma-separated sizes for the timing curve")
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--out", default="results", help="output directory")
    args = ap.parse_args()

    out_dir = Path(args.out)
    out_dir.mkdir(exist_ok=True)
    names = args.only if args.only else sorted(BENCHMARKS)

    reports = {}
    skipped = []
    for name in names:
        if not (DATA_DIR / f"{name}.csv").exists():
            skipped.append(name)
            continue
        reports[name] = sweep_one(name, BENCHMARKS[name], args.seed, out_dir)
    if skipped:
        print(f"not fetched, skipped: {', '.join(skipped)} "
              f"(run scripts/fetch_datasets.py)")

    if args.scaling:
        sizes = [int(x) for x in args.scaling.split(",") if x.strip()]
        print(f"scaling curve on blobs, sizes {sizes}, "
              f"median of {args.repeats} runs:")
        report = run_scaling(sizes, repeats=args.repeats, seed=args.seed)
        for row in report["sizes"]:
            print(f"  n={row['n']:<7} graph {row['graph_ms'] / 1000:.1f}s  "
                  f"pipeline {row['pipeline_ms'] / 1000:.1f}s")
        for r in report["ratios"]:
            print(f"  {r['from_n']}->{r['to_n']}: graph x{r['graph_ratio']:.2f}  "
                  f"pipeline x{r['pipeline_ratio']:.2f}")
        reports["scaling"] = report

    summary_path = out_dir / "benchmarks.json"
    with open(summary_path, "w") as fh:
        json.dump(reports, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"full reports written to {summary_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
