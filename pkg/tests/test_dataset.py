"""CSV loading, label canonicalization, and normalization."""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from graphclust.dataset import (
    NORMALIZE_MODES,
    PointSet,
    canonicalize_labels,
    load_csv,
    normalize,
    read_labels,
    write_csv,
    write_labels,
)
from graphclust.errors import DataError

finite_floats = st.floats(
    allow_nan=False, allow_infinity=False, min_value=-1e12, max_value=1e12
)


def test_pointset_validates():
    ps = PointSet(np.arange(6.0).reshape(2, 3))
    assert ps.n == 2 and ps.d == 3
    assert ps.data.dtype == np.float64 and ps.data.flags["C_CONTIGUOUS"]
    with pytest.raises(DataError):
        PointSet(np.arange(3.0))
    with pytest.raises(DataError):
        PointSet(np.array([[1.0, np.nan]]))
    with pytest.raises(DataError):
        PointSet(np.empty((0, 4)))


def test_pointset_copies_non_float_input():
    ints = np.array([[1, 2], [3, 4]])
    ps = PointSet(ints)
    assert ps.data.dtype == np.float64
    np.testing.assert_array_equal(ps.data, ints.astype(float))


def test_canonicalize_first_occurrence():
    out = canonicalize_labels(["b", "a", "b", "c", "a"])
    np.testing.assert_array_equal(out, [0, 1, 0, 2, 1])


@given(st.lists(st.sampled_from("abcde"), min_size=1, max_size=40))
def test_canonicalize_is_dense_and_order_preserving(raw):
    out = canonicalize_labels(raw)
    k = len(set(raw))
    assert sorted(set(out.tolist())) == list(range(k))
    # first occurrences appear in increasing id order
    firsts = [out[raw.index(v)] for v in dict.fromkeys(raw)]
    assert firsts == list(range(k))


def test_load_csv_plain(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("1.5,2.0\n3.25,-4\n")
    points, labels = load_csv(p)
    assert labels is None
    np.testing.assert_array_equal(points.data, [[1.5, 2.0], [3.25, -4.0]])


def test_load_csv_label_column_variants(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("1,2,x\n3,4,y\n5,6,x\n")
    for col in ("last", 2, -1):
        points, labels = load_csv(p, label_column=col)
        assert points.d == 2
        np.testing.assert_array_equal(labels, [0, 1, 0])
    p.write_text("a,1,2\nb,3,4\n")
    points, labels = load_csv(p, label_column=0)
    np.testing.assert_array_equal(labels, [0, 1])
    np.testing.assert_array_equal(points.data, [[1.0, 2.0], [3.0, 4.0]])


def test_load_csv_header_detection(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("sepal_l,sepal_w,species\n5.1,3.5,setosa\n4.9,3.0,setosa\n")
    points, labels = load_csv(p, label_column="last")
    assert points.n == 2
    np.testing.assert_array_equal(labels, [0, 0])
    # numeric-looking header is kept as data; that's the documented heuristic
    p.write_text("1,2\n3,4\n")
    points, _ = load_csv(p)
    assert points.n == 2


def test_load_csv_errors_name_the_row(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("1,2\n3\n")
    with pytest.raises(DataError, match="row 2"):
        load_csv(p)
    p.write_text("1,2\n3,oops\n")
    with pytest.raises(DataError, match="row 2.*column 2"):
        load_csv(p)
    p.write_text("")
    with pytest.raises(DataError, match="empty"):
        load_csv(p)
    with pytest.raises(DataError):
        load_csv(tmp_path / "missing.csv")
    p.write_text("1,2\n3,4\n")
    with pytest.raises(DataError, match="out of range"):
        load_csv(p, label_column=5)
    p.write_text("x\ny\n")
    with pytest.raises(DataError, match="no feature columns"):
        load_csv(p, label_column=0)


@given(
    st.integers(1, 12),
    st.integers(1, 5),
    st.integers(0, 2 ** 31 - 1),
    st.booleans(),
)
def test_csv_round_trip_exact(tmp_path_factory, n, d, seed, with_labels):
    rng = np.random.default_rng(seed)
    points = PointSet(rng.normal(scale=10.0, size=(n, d)) * rng.choice([1e-8, 1.0, 1e8]))
    labels = rng.integers(0, 3, size=n) if with_labels else None
    path = tmp_path_factory.mktemp("rt") / "d.csv"
    write_csv(path, points, labels)
    got_points, got_labels = load_csv(path, label_column="last" if with_labels else None)
    # repr round-trips float64 exactly, so equality is bitwise
    np.testing.assert_array_equal(got_points.data, points.data)
    if with_labels:
        np.testing.assert_array_equal(got_labels, canonicalize_labels([str(x) for x in labels]))
    else:
        assert got_labels is None


def test_normalize_modes():
    points = PointSet(np.array([[0.0, 5.0], [5.0, 5.0], [10.0, 5.0]]))
    mm = normalize(points, "minmax")
    np.testing.assert_allclose(mm.data[:, 0], [0.0, 0.5, 1.0])
    np.testing.assert_array_equal(mm.data[:, 1], 0.0)  # constant column -> zeros
    zs = normalize(points, "zscore")
    assert abs(zs.data[:, 0].mean()) < 1e-12
    np.testing.assert_allclose(zs.data[:, 0].std(), 1.0)
    np.testing.assert_array_equal(zs.data[:, 1], 0.0)
    assert normalize(points, "none") is points
    with pytest.raises(DataError, match="unknown normalize mode"):
        normalize(points, "robust")
    assert set(NORMALIZE_MODES) == {"none", "minmax", "zscore"}


@given(
    st.integers(2, 20),
    st.integers(1, 4),
    st.integers(0, 2 ** 31 - 1),
)
def test_minmax_range_property(n, d, seed):
    rng = np.random.default_rng(seed)
    out = normalize(PointSet(rng.normal(size=(n, d))), "minmax").data
    assert out.min() >= 0.0 and out.max() <= 1.0


def test_labels_file_round_trip(tmp_path):
    path = tmp_path / "out.labels"
    labels = np.array([0, 2, 1, 2, 0], dtype=np.int64)
    write_labels(path, labels)
    assert path.read_text() == "0\n2\n1\n2\n0\n"
    np.testing.assert_array_equal(read_labels(path), labels)
    path.write_text("1\nx\n")
    with pytest.raises(DataError, match="integers"):
        read_labels(path)
    path.write_text("")
    with pytest.raises(DataError, match="empty"):
        read_labels(path)
