"""Loading, validation, and normalization of labeled numeric datasets.

A dataset on disk is a CSV file of feature rows with an optional label
column and an optional header (detected when the first row has a
non-numeric feature cell). Labels may be arbitrary strings; they are
canonicalized to contiguous integer ids 0..K-1 by first occurrence.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError

# A LabelVector is a 1-d int64 array of contiguous class ids 0..K-1.
LabelVector = np.ndarray


@dataclass(frozen=True)
class PointSet:
    """Dense n x d feature matrix with finite float64 entries."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(self.data, dtype=np.float64)
        if arr.ndim != 2:
            raise DataError(f"point matrix must be 2-d, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise DataError(f"point matrix must be at least 1x1, got {arr.shape}")
        if not np.isfinite(arr).all():
            bad = np.argwhere(~np.isfinite(arr))[0]
            raise DataError(f"non-finite value at row {bad[0]}, column {bad[1]}")
        object.__setattr__(self, "data", arr)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def d(self) -> int:
        return self.data.shape[1]


def canonicalize_labels(raw: list[str]) -> LabelVector:
    """Map raw label strings to integer ids 0..K-1 in first-occurrence order."""
    mapping: dict[str, int] = {}
    out = np.empty(len(raw), dtype=np.int64)
    for i, value in enumerate(raw):
        if value not in mapping:
            mapping[value] = len(mapping)
        out[i] = mapping[value]
    return out


def _is_numeric(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def _resolve_label_index(label_column: int | str | None, width: int) -> int | None:
    if label_column is None:
        return None
    if label_column == "last":
        return width - 1
    idx = int(label_column)
    if idx < 0:
        idx += width
    if not 0 <= idx < width:
        raise DataError(f"label column {label_column} out of range for {width} columns")
    return idx


def load_csv(
    path: str | Path, label_column: int | str | None = None
) -> tuple[PointSet, LabelVector | None]:
    """Load a CSV file into a PointSet and an optional canonicalized label vector.

    ``label_column`` selects the label column by 0-based index (negative
    indices count from the right) or ``"last"``. Rows must have a uniform
    column count; feature cells must parse as real numbers.
    """
    path = Path(path)
    try:
        with open(path, newline="") as fh:
            rows = [row for row in csv.reader(fh) if row]
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise DataError(f"{path}: empty file")

    width = len(rows[0])
    label_idx = _resolve_label_index(label_column, width)
    feature_cols = [j for j in range(width) if j != label_idx]
    if not feature_cols:
        raise DataError(f"{path}: no feature columns left after removing labels")

    # Header heuristic: a non-numeric cell in a feature position of row 1.
    start = 0
    if any(not _is_numeric(rows[0][j]) for j in feature_cols if j < len(rows[0])):
        start = 1
        if len(rows) == 1:
            raise DataError(f"{path}: only a header row, no data")

    n = len(rows) - start
    data = np.empty((n, len(feature_cols)), dtype=np.float64)
    raw_labels: list[str] = []
    for i, row in enumerate(rows[start:], start=start):
        if len(row) != width:
            raise DataError(
                f"{path}: ragged row {i + 1} has {len(row)} columns, expected {width}"
            )
        for out_j, j in enumerate(feature_cols):
            cell = row[j].strip()
            try:
                data[i - start, out_j] = float(cell)
            except ValueError:
                raise DataError(
                    f"{path}: non-numeric feature {cell!r} at row {i + 1}, column {j + 1}"
                ) from None
        if label_idx is not None:
            raw_labels.append(row[label_idx].strip())

    points = PointSet(data)
    labels = canonicalize_labels(raw_labels) if label_idx is not None else None
    return points, labels


def write_csv(path: str | Path, points: PointSet, labels: LabelVector | None = None) -> None:
    """Write points (and optional labels as a final column) as headerless CSV.

    Floats are written with shortest round-trip repr, so load_csv reads the
    exact same values back.
    """
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for i in range(points.n):
            row = [repr(v) for v in points.data[i].tolist()]
            if labels is not None:
                row.append(str(int(labels[i])))
            writer.writerow(row)


NORMALIZE_MODES = ("none", "minmax", "zscore")


def normalize(points: PointSet, mode: str = "none") -> PointSet:
    """Rescale feature columns: identity, min-max to [0,1], or z-score.

    Constant columns map to all zeros under both scaling modes.
    """
    if mode not in NORMALIZE_MODES:
        raise DataError(f"unknown normalize mode {mode!r}, expected one of {NORMALIZE_MODES}")
    if mode == "none":
        return points
    data = points.data
    if mode == "minmax":
        lo = data.min(axis=0)
        span = data.max(axis=0) - lo
        out = np.zeros_like(data)
        nz = span > 0
        out[:, nz] = (data[:, nz] - lo[nz]) / span[nz]
        return PointSet(out)
    mean = data.mean(axis=0)
    std = data.std(axis=0)
    out = np.zeros_like(data)
    nz = std > 0
    out[:, nz] = (data[:, nz] - mean[nz]) / std[nz]
    return PointSet(out)


def write_labels(path: str | Path, labels: LabelVector) -> None:
    """Write one integer label per line; line i is the cluster of point i."""
    with open(path, "w") as fh:
        for value in labels:
            fh.write(f"{int(value)}\n")


def read_labels(path: str | Path) -> LabelVector:
    """Read a labels file (one integer per line)."""
    try:
        with open(path) as fh:
            values = [line.strip() for line in fh if line.strip()]
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if not values:
        raise DataError(f"{path}: empty labels file")
    try:
        return np.array([int(v) for v in values], dtype=np.int64)
    except ValueError as exc:
        raise DataError(f"{path}: labels must be integers ({exc})") from None
