import numpy as np
import pytest

from aosoboost.data import (
    DataError,
    Dataset,
    load_csv,
    load_dataset,
    load_libsvm,
    presort,
    quantize_features,
)


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


class TestLibsvm:
    def test_basic_line(self, tmp_path):
        path = write(tmp_path, "a.svm", "1 3:0.5 7:1.2\n2 1:1\n")
        ds = load_libsvm(path)
        assert ds.n_examples == 2 and ds.n_features == 7
        assert ds.features[0, 2] == 0.5 and ds.features[0, 6] == 1.2
        assert ds.features[0, 0] == 0.0  # absent features are zero
        assert ds.labels.tolist() == [0, 1]

    def test_empty_file_rejected(self, tmp_path):
        path = write(tmp_path, "empty.svm", "")
        with pytest.raises(DataError, match="N=0"):
            load_libsvm(path)

    def test_k_from_max_label(self, tmp_path):
        lines = "".join("%d 1:%d\n" % (k, k) for k in range(1, 27))
        ds = load_libsvm(write(tmp_path, "letters.svm", lines))
        assert ds.n_classes == 26

    def test_non_numeric_label(self, tmp_path):
        path = write(tmp_path, "bad.svm", "x 1:1\n")
        with pytest.raises(DataError, match="bad.svm:1"):
            load_libsvm(path)

    def test_malformed_pair_reports_line(self, tmp_path):
        path = write(tmp_path, "bad.svm", "1 1:1\n2 3:\n")
        with pytest.raises(DataError, match=":2"):
            load_libsvm(path)

    def test_duplicate_index_rejected(self, tmp_path):
        path = write(tmp_path, "dup.svm", "1 2:1 2:3\n")
        with pytest.raises(DataError, match="duplicate"):
            load_libsvm(path)

    def test_zero_index_rejected(self, tmp_path):
        path = write(tmp_path, "zero.svm", "1 0:1\n")
        with pytest.raises(DataError, match="not positive"):
            load_libsvm(path)

    def test_decreasing_indices_allowed(self, tmp_path):
        ds = load_libsvm(write(tmp_path, "rev.svm", "1 5:2 1:1\n2 1:1\n"))
        assert ds.features[0, 4] == 2.0 and ds.features[0, 0] == 1.0

    def test_arity_override(self, tmp_path):
        path = write(tmp_path, "a.svm", "1 2:1\n2 1:1\n")
        ds = load_libsvm(path, n_features=5)
        assert ds.n_features == 5
        with pytest.raises(DataError, match="exceeds"):
            load_libsvm(path, n_features=1)

    def test_label_remap_report(self, tmp_path, caplog):
        path = write(tmp_path, "zero_based.svm", "0 1:1\n9 1:2\n3 1:0.5\n")
        with caplog.at_level("WARNING"):
            ds = load_libsvm(path)
        assert ds.label_remapped
        assert ds.n_classes == 3
        assert ds.label_values == [0, 3, 9]
        assert ds.labels.tolist() == [0, 2, 1]
        assert any("remapped" in r.message for r in caplog.records)
        np.testing.assert_array_equal(ds.original_labels(), [0, 9, 3])


class TestCsv:
    def test_basic(self, tmp_path):
        path = write(tmp_path, "a.csv", "1,0.5,2.0\n2,1.5,3.0\n1,2.5,4.0\n")
        ds = load_csv(path)
        assert ds.n_examples == 3 and ds.n_features == 2
        assert ds.labels.tolist() == [0, 1, 0]
        np.testing.assert_allclose(ds.features[:, 0], [0.5, 1.5, 2.5])

    def test_header_autodetect(self, tmp_path):
        path = write(tmp_path, "h.csv", "label,f1,f2\n1,0.5,2e-1\n2,1.5,3.0\n")
        ds = load_csv(path)
        assert ds.n_examples == 2

    def test_label_column_variants(self, tmp_path):
        path = write(tmp_path, "a.csv", "0.5,2.0,1\n1.5,3.0,2\n")
        ds = load_csv(path, label_column=-1)
        assert ds.labels.tolist() == [0, 1]
        np.testing.assert_allclose(ds.features[0], [0.5, 2.0])

    def test_label_column_out_of_range(self, tmp_path):
        path = write(tmp_path, "a.csv", "1,2\n")
        with pytest.raises(DataError, match="out of range"):
            load_csv(path, label_column=5)

    def test_ragged_row(self, tmp_path):
        path = write(tmp_path, "r.csv", "1,2,3\n1,2\n")
        with pytest.raises(DataError, match="ragged"):
            load_csv(path)

    def test_non_numeric_cell(self, tmp_path):
        path = write(tmp_path, "n.csv", "1,2,3\n1,x,3\n")
        with pytest.raises(DataError, match="non-numeric cell"):
            load_csv(path)

    def test_non_integer_label(self, tmp_path):
        path = write(tmp_path, "f.csv", "1.5,2,3\n")
        with pytest.raises(DataError, match="non-integers"):
            load_csv(path)

    def test_sparse_and_dense_loaders_agree(self, tmp_path):
        svm = write(tmp_path, "a.svm", "1 1:0.5 2:2\n2 1:1.5 2:3\n")
        csvp = write(tmp_path, "a.csv", "1,0.5,2\n2,1.5,3\n")
        a = load_libsvm(svm)
        b = load_csv(csvp)
        np.testing.assert_array_equal(a.features, b.features)
        np.testing.assert_array_equal(a.labels, b.labels)

    def test_auto_dispatch(self, tmp_path):
        csvp = write(tmp_path, "a.csv", "1,0.5\n2,1.5\n")
        svm = write(tmp_path, "a.libsvm", "1 1:0.5\n2 1:1.5\n")
        np.testing.assert_array_equal(
            load_dataset(csvp).features, load_dataset(svm).features
        )


class TestPresort:
    def test_simple_order(self):
        ds = Dataset.from_arrays([[3.0], [1.0], [2.0]], [1, 2, 1])
        assert presort(ds).order[0].tolist() == [1, 2, 0]

    def test_all_equal_is_identity(self):
        ds = Dataset.from_arrays(np.ones((5, 1)), [1, 2, 1, 2, 1])
        assert presort(ds).order[0].tolist() == [0, 1, 2, 3, 4]

    def test_permutation_and_monotone(self, rng):
        x = rng.integers(0, 10, size=(200, 3)).astype(float)
        ds = Dataset.from_arrays(x, rng.integers(1, 4, size=200))
        order = presort(ds).order
        for f in range(3):
            perm = order[f]
            assert sorted(perm.tolist()) == list(range(200))
            vals = x[perm, f]
            assert np.all(np.diff(vals) >= 0)

    def test_stability_on_ties(self):
        x = np.array([[2.0], [1.0], [2.0], [1.0], [2.0]])
        ds = Dataset.from_arrays(x, [1, 2, 1, 2, 1])
        assert presort(ds).order[0].tolist() == [1, 3, 0, 2, 4]


class TestQuantize:
    def test_few_uniques_unchanged(self, rng):
        x = rng.integers(0, 5, size=(50, 2)).astype(float)
        ds = Dataset.from_arrays(x, rng.integers(1, 3, size=50))
        q = quantize_features(ds, 16)
        np.testing.assert_array_equal(q.features, ds.features)

    def test_reduces_distinct_values(self, rng):
        x = rng.normal(size=(500, 2))
        ds = Dataset.from_arrays(x, rng.integers(1, 3, size=500))
        q = quantize_features(ds, 8)
        for f in range(2):
            reps = np.unique(q.features[:, f])
            assert reps.size <= 8
            # representatives are actual data values, so thresholds stay
            # comparable against raw features
            assert np.all(np.isin(reps, x[:, f]))

    def test_bins_range_validated(self, rng):
        ds = Dataset.from_arrays(rng.normal(size=(10, 1)), rng.integers(1, 3, size=10))
        with pytest.raises(DataError):
            quantize_features(ds, 1)
        with pytest.raises(DataError):
            quantize_features(ds, 500)


class TestDatasetConstruction:
    def test_from_arrays_checks_shape(self):
        with pytest.raises(DataError):
            Dataset.from_arrays(np.zeros((3, 2)), [1, 2])

    def test_empty_rejected(self):
        with pytest.raises(DataError):
            Dataset.from_arrays(np.zeros((0, 2)), [])

    def test_non_integer_labels_rejected(self):
        with pytest.raises(DataError):
            Dataset.from_arrays(np.zeros((2, 1)), [1.5, 2.0])

    def test_declared_vocabulary_with_gaps(self):
        ds = Dataset.from_arrays(np.zeros((2, 1)), [1, 3], n_classes=3)
        assert ds.n_classes == 3 and not ds.label_remapped
        with pytest.raises(DataError):
            Dataset.from_arrays(np.zeros((2, 1)), [1, 4], n_classes=3)
