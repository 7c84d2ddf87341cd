# tests/test_datasets.py

import logging

import numpy as np
import pytest

from qsvrg.core.exceptions import ConfigurationError, DatasetError
from qsvrg.storage.datasets import (
    LAMBDA_SCALES,
    RawDataset,
    lambda_grid,
    load_csv,
    preprocess,
    save_csv,
    synthetic_problem,
)


@pytest.fixture
def write_csv(temp_dir):
    def write(text, name="data.csv"):
        path = temp_dir / name
        path.write_text(text, encoding="utf-8")
        return path

    return write


class TestLoadCsv:
    """Reading labelled CSV files"""

    def test_two_rows(self, write_csv):
        raw = load_csv(write_csv("1,2,0\n3,4,1\n"))
        np.testing.assert_array_equal(raw.features, [[1.0, 2.0], [3.0, 4.0]])
        np.testing.assert_array_equal(raw.labels, [0.0, 1.0])
        assert (raw.n, raw.d) == (2, 2)
        assert raw.name == "data"

    def test_header_and_blank_lines(self, write_csv):
        raw = load_csv(write_csv("a,b,label\n\n1,2,0\n3,4,1\n\n"))
        assert raw.n == 2

    def test_ragged_row(self, write_csv):
        with pytest.raises(DatasetError, match="expected 3 columns") as exc_info:
            load_csv(write_csv("1,2,3\n4,5\n"))
        assert exc_info.value.line == 2

    def test_non_numeric_cell(self, write_csv):
        with pytest.raises(DatasetError, match="non-numeric") as exc_info:
            load_csv(write_csv("a,b,y\n1,2,3\n1,x,3\n"))
        assert exc_info.value.line == 3
        assert exc_info.value.path.endswith("data.csv")

    def test_non_finite_cell(self, write_csv):
        with pytest.raises(DatasetError, match="non-finite"):
            load_csv(write_csv("1,2,3\n1,nan,3\n"))

    def test_single_column(self, write_csv):
        with pytest.raises(DatasetError, match="feature column"):
            load_csv(write_csv("1\n2\n"))

    def test_single_row(self, write_csv):
        with pytest.raises(DatasetError, match="two observations"):
            load_csv(write_csv("1,2,3\n"))

    def test_empty_file(self, write_csv):
        with pytest.raises(DatasetError, match="empty"):
            load_csv(write_csv("\n\n"))

    def test_missing_file(self, temp_dir):
        with pytest.raises(DatasetError, match="cannot read"):
            load_csv(temp_dir / "missing.csv")

    def test_known_dataset_shape_warning(self, write_csv, caplog):
        with caplog.at_level(logging.WARNING):
            load_csv(write_csv("1,2,0\n3,4,1\n", name="sonar.csv"))
        assert "expected 60 variables" in caplog.text

    def test_save_round_trip(self, temp_dir):
        rng = np.random.default_rng(0)
        raw = RawDataset(features=rng.normal(size=(5, 3)), labels=rng.normal(size=5), name="x")
        loaded = load_csv(save_csv(raw, temp_dir / "x.csv"))
        np.testing.assert_array_equal(loaded.features, raw.features)
        np.testing.assert_array_equal(loaded.labels, raw.labels)


class TestPreprocess:
    """Standardization and the appended intercept column"""

    def test_single_column(self):
        raw = RawDataset(features=np.array([[1.0], [3.0]]), labels=np.zeros(2), name="t")
        design, report = preprocess(raw)
        np.testing.assert_allclose(design.rows, [[-1.0, 1.0], [1.0, 1.0]])
        assert report.means == [2.0]
        assert report.scales == [1.0]
        assert report.constant_column_index == 1

    def test_standardized_columns(self):
        rng = np.random.default_rng(1)
        raw = RawDataset(
            features=rng.normal(loc=5.0, scale=3.0, size=(40, 3)), labels=np.zeros(40), name="t"
        )
        design, _ = preprocess(raw)
        body = design.rows[:, :-1]
        np.testing.assert_allclose(body.mean(axis=0), 0.0, atol=1e-12)
        np.testing.assert_allclose(body.std(axis=0), 1.0, rtol=1e-12)
        np.testing.assert_array_equal(design.rows[:, -1], 1.0)

    def test_constant_columns_dropped(self):
        features = np.array([[1.0, 7.0, 2.0], [2.0, 7.0, 4.0], [3.0, 7.0, 9.0]])
        design, report = preprocess(RawDataset(features=features, labels=np.zeros(3), name="t"))
        assert report.dropped_columns == [1]
        assert design.d == 3

    def test_all_constant(self):
        raw = RawDataset(features=np.ones((4, 2)), labels=np.zeros(4), name="t")
        with pytest.raises(DatasetError, match="zero variance"):
            preprocess(raw)

    def test_idempotent(self):
        rng = np.random.default_rng(2)
        raw = RawDataset(features=rng.normal(size=(30, 4)), labels=np.zeros(30), name="t")
        design, _ = preprocess(raw)
        again, _ = preprocess(RawDataset(design.rows[:, :-1], raw.labels, "t"))
        np.testing.assert_allclose(again.rows, design.rows, atol=1e-12)


class TestSyntheticProblem:
    """Generated regression problems with a prescribed conditioning"""

    @pytest.mark.parametrize("kappa", [1.0, 10.0, 100.0])
    def test_condition_number(self, kappa):
        design, y = synthetic_problem(200, 6, kappa, seed=0)
        eigenvalues = np.linalg.eigvalsh(design.gram())
        assert eigenvalues[-1] / eigenvalues[0] == pytest.approx(kappa, rel=0.01)
        assert y.shape == (200,)

    def test_deterministic(self):
        first = synthetic_problem(50, 3, 10.0, seed=4)
        second = synthetic_problem(50, 3, 10.0, seed=4)
        np.testing.assert_array_equal(first[0].rows, second[0].rows)
        np.testing.assert_array_equal(first[1], second[1])

    def test_seed_changes_problem(self):
        first = synthetic_problem(50, 3, 10.0, seed=4)
        second = synthetic_problem(50, 3, 10.0, seed=5)
        assert not np.array_equal(first[1], second[1])

    def test_mean_squared_row_norm(self):
        design, _ = synthetic_problem(100, 1, 1.0)
        assert design.lbar == pytest.approx(1.0)

    @pytest.mark.parametrize("n,d,kappa", [(3, 5, 10.0), (5, 0, 10.0), (10, 3, 0.5)])
    def test_invalid_arguments(self, n, d, kappa):
        with pytest.raises(ConfigurationError):
            synthetic_problem(n, d, kappa)


class TestLambdaGrid:
    def test_default_scales(self):
        assert lambda_grid(2.0, 100) == pytest.approx([0.02, 0.002, 0.0002])
        assert len(LAMBDA_SCALES) == 3

    def test_custom_scales(self):
        assert lambda_grid(1.0, 10, scales=[5.0]) == pytest.approx([0.5])
