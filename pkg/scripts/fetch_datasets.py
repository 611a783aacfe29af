#!/usr/bin/env python3
"""Fetch the benchmark datasets into data/ as canonical label-last CSVs.

Sources are the UCI repository mirrors; iris falls back to scikit-learn
when offline. Each dataset lands in data/<name>.csv with numeric feature
columns and the class label as the final column, ready for

    graphclust sweep --data data/<name>.csv --label-column last

Re-running skips files that already exist (use --force to refresh).
"""

import argparse
import sys
import urllib.request
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from graphclust.dataset import PointSet, canonicalize_labels, write_csv  # noqa: E402

DATA_DIR = Path(__file__).resolve().parents[1] / "data"
UCI = "https://archive.ics.uci.edu/ml/machine-learning-databases"

SOURCES = {
    "iris": [f"{UCI}/iris/iris.data"],
    "wireless": [f"{UCI}/00422/wifi_localization.txt"],
    "seeds": [f"{UCI}/00236/seeds_dataset.txt"],
    "soybean": [f"{UCI}/soybean/soybean-small.data"],
    "pendigits": [f"{UCI}/pendigits/pendigits.tra", f"{UCI}/pendigits/pendigits.tes"],
}


def fetch(url, timeout=60):
    print(f"  GET {url}")
    with urllib.request.urlopen(url, timeout=timeout) as fh:
        return fh.read().decode("utf-8")


def rows_from(text, sep):
    rows = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        cells = line.split(sep) if sep else line.split()
        rows.append([c.strip() for c in cells if c.strip() != ""])
    return rows


def to_csv(rows, out_path):
    """Feature columns to float, last column canonicalized to 0..K-1."""
    feats = np.array([[float(c) for c in row[:-1]] for row in rows])
    labels = canonicalize_labels([row[-1] for row in rows])
    write_csv(out_path, PointSet(feats), labels)
    print(f"  wrote {out_path}  ({feats.shape[0]} rows, {feats.shape[1]} features, "
          f"{labels.max() + 1} classes)")


def build_iris(out_path):
    try:
        text = fetch(SOURCES["iris"][0])
        rows = [r for r in rows_from(text, ",") if len(r) == 5]
    except Exception as exc:
        print(f"  UCI unreachable ({exc}); falling back to scikit-learn")
        from sklearn.datasets import load_iris

        raw = load_iris()
        write_csv(out_path, PointSet(raw.data), raw.target.astype(np.int64))
        print(f"  wrote {out_path}  (150 rows, 4 features, 3 classes)")
        return
    to_csv(rows, out_path)


def build_wireless(out_path):
    to_csv(rows_from(fetch(SOURCES["wireless"][0]), None), out_path)


def build_seeds(out_path):
    # whitespace-separated; some rows carry doubled tabs, split() handles it
    to_csv(rows_from(fetch(SOURCES["seeds"][0]), None), out_path)


def build_soybean(out_path):
    to_csv(rows_from(fetch(SOURCES["soybean"][0]), ","), out_path)


def build_pendigits(out_path):
    rows = []
    for url in SOURCES["pendigits"]:
        rows += rows_from(fetch(url), ",")
    assert len(rows) == 10992, f"expected 10992 rows, got {len(rows)}"
    to_csv(rows, out_path)


BUILDERS = {
    "iris": build_iris,
    "wireless": build_wireless,
    "seeds": build_seeds,
    "soybean": build_soybean,
    "pendigits": build_pendigits,
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--only", nargs="*", choices=sorted(BUILDERS),
                    help="fetch just these datasets")
    ap.add_argument("--force", action="store_true", help="refetch existing files")
    args = ap.parse_args()
    DATA_DIR.mkdir(exist_ok=True)
    names = args.only if args.only else sorted(BUILDERS)
    failures = []
    for name in names:
        out_path = DATA_DIR / f"{name}.csv"
        print(f"{name}:")
        if out_path.exists() and not args.force:
            print(f"  {out_path} already present, skipping")
            continue
        try:
            BUILDERS[name](out_path)
        except Exception as exc:
            failures.append(name)
            print(f"  FAILED: {exc}")
    if failures:
        print(f"\ncould not fetch: {', '.join(failures)} "
              "(offline? retry on a machine with network access)")
        return 1
    print("\nall requested datasets ready")
    return 0


if __name__ == "__main__":
    sys.exit(main())
