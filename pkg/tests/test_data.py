import numpy as np
import pytest

from centclust.data import Dataset, feature_subset, generate_mixture_1d, load_dataset, save_dataset
from centclust.kmeans import kmeans
from centclust.metrics import approx_distance, exact_distance


def test_dataset_validation():
    with pytest.raises(ValueError):
        Dataset(np.array([[1.0, np.nan]]))
    with pytest.raises(ValueError):
        Dataset(np.empty((0, 2)))
    with pytest.raises(ValueError):
        Dataset(np.ones((3, 2)), column_names=["only_one"])
    d = Dataset(np.ones((3, 2)))
    assert d.n == 3 and d.d == 2 and d.column_names is None


def test_dataset_coerces_vector_to_column():
    d = Dataset(np.arange(4.0))
    assert d.rows.shape == (4, 1)


def test_generate_shapes_and_determinism():
    data, truth = generate_mixture_1d(200, [0.0, 10.0], 0.5, seed=4)
    assert data.rows.shape == (200, 1)
    assert truth.n == 200
    data2, truth2 = generate_mixture_1d(200, [0.0, 10.0], 0.5, seed=4)
    assert np.array_equal(data.rows, data2.rows)
    assert truth == truth2
    data3, _ = generate_mixture_1d(200, [0.0, 10.0], 0.5, seed=5)
    assert not np.array_equal(data.rows, data3.rows)


def test_generate_validation():
    with pytest.raises(ValueError):
        generate_mixture_1d(0, [1.0], 0.5, seed=0)
    with pytest.raises(ValueError):
        generate_mixture_1d(10, [1.0, 2.0], 0.0, seed=0)
    with pytest.raises(ValueError):
        generate_mixture_1d(10, [], 0.5, seed=0)


def test_generate_component_frequencies_near_equal():
    n, m = 20000, 5
    _, truth = generate_mixture_1d(n, list(range(m)), 1e-3, seed=11)
    p = 1.0 / m
    se = np.sqrt(p * (1 - p) / n)
    counts = np.bincount(truth.labels, minlength=m)
    assert np.all(np.abs(counts / n - p) <= 3 * se)


def test_generate_labels_match_positions():
    # with tiny sigma each observation sits on its component mean, so the
    # rounded values induce the same partition as the returned truth
    from centclust.clusterings import Clustering

    data, truth = generate_mixture_1d(500, [1.0, 2.0, 3.0], 1e-9, seed=8)
    rounded = np.rint(data.rows[:, 0]).astype(int)
    assert set(np.unique(rounded)) == {1, 2, 3}
    assert exact_distance(truth, Clustering(rounded)).value == 0.0


def test_roundtrip_without_header(tmp_path):
    rng = np.random.default_rng(0)
    d = Dataset(rng.standard_normal((50, 3)))
    path = tmp_path / "data.csv"
    save_dataset(d, path)
    back = load_dataset(path)
    assert back.column_names is None
    assert np.array_equal(back.rows, d.rows)


def test_roundtrip_with_header(tmp_path):
    rng = np.random.default_rng(1)
    d = Dataset(rng.standard_normal((100, 4)), column_names=["a", "b", "c", "dd"])
    path = tmp_path / "data.csv"
    save_dataset(d, path)
    back = load_dataset(path)
    assert back.n == 100 and back.d == 4
    assert back.column_names == ("a", "b", "c", "dd")
    assert np.array_equal(back.rows, d.rows)


def test_load_reports_bad_cell_line(tmp_path):
    path = tmp_path / "bad.csv"
    lines = ["x,y"] + [f"{i}.0,{i}.5" for i in range(5)]
    lines[6 - 1] = "4.0,oops"  # file line 6
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(ValueError, match="line 6"):
        load_dataset(path)


def test_load_reports_ragged_row(tmp_path):
    path = tmp_path / "ragged.csv"
    path.write_text("1.0,2.0\n3.0\n")
    with pytest.raises(ValueError, match="line 2"):
        load_dataset(path)


def test_load_empty_file(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("")
    with pytest.raises(ValueError):
        load_dataset(path)


def test_feature_subset():
    rng = np.random.default_rng(2)
    d = Dataset(rng.standard_normal((20, 4)), column_names=["a", "b", "c", "e"])
    full = feature_subset(d, [0, 1, 2, 3])
    assert np.array_equal(full.rows, d.rows)
    assert full.column_names == d.column_names
    sub = feature_subset(d, [0, 1, 2])
    assert sub.d == 3
    assert sub.column_names == ("a", "b", "c")
    reordered = feature_subset(d, [3, 0])
    assert np.array_equal(reordered.rows, d.rows[:, [3, 0]])
    with pytest.raises(ValueError):
        feature_subset(d, [0, 4])


def test_variable_deletion_comparison_regime():
    # k-means on all four variables vs the first three: distances obey the
    # bound and land in a moderate-disagreement band
    rng = np.random.default_rng(40)
    centers = rng.uniform(-6, 6, size=(11, 4))
    comp = rng.integers(0, 11, size=2000)
    d4 = Dataset(centers[comp] + 1.8 * rng.standard_normal((2000, 4)))
    d3 = feature_subset(d4, [0, 1, 2])
    a = kmeans(d4, 11, seed=1)
    b = kmeans(d3, 11, seed=1)
    ex = exact_distance(a, b).value
    ap = approx_distance(a, b).value
    assert ap <= ex
    assert 0.05 <= ex <= 0.6
