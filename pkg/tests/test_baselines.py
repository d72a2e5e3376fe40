import numpy as np
import pytest

from amr_toolkit.core.baselines import (
    KnnConfig,
    RegressionTree,
    TreeConfig,
    dtree_fit_predict,
    knn_predict,
    linreg_fit_predict,
    load_external_predictions,
    make_regressor,
    select_knn_k,
)
from amr_toolkit.core.exceptions import (
    InsufficientData,
    InvalidParameter,
    MissingPredictions,
    ParseError,
    RankDeficient,
    RowCountMismatch,
)


class TestKnn:
    def test_single_row(self):
        assert knn_predict([[1, 2]], [7], [5, 5], KnnConfig(k=1)) == 7.0

    def test_equidistant_pair(self):
        assert knn_predict([[0.0], [2.0]], [1, 3], [1.0], KnnConfig(k=2)) == 2.0

    def test_exact_match_wins(self):
        assert knn_predict([[0, 0], [1, 1], [5, 5]], [1, 2, 3], [1, 1], KnnConfig(k=1)) == 2.0

    def test_distance_ties_go_to_lower_index(self):
        assert knn_predict([[0.0], [2.0]], [1, 3], [1.0], KnnConfig(k=1)) == 1.0

    def test_k_equal_n_is_global_mean(self, rng):
        X = rng.normal(size=(7, 2))
        y = rng.normal(size=7)
        assert knn_predict(X, y, [0.0, 0.0], KnnConfig(k=7)) == pytest.approx(y.mean())

    def test_nearest_regressand_exactly(self, rng):
        X = rng.normal(size=(20, 3))
        y = rng.normal(size=20)
        x_te = rng.normal(size=3)
        nearest = int(np.argmin(np.linalg.norm(X - x_te, axis=1)))
        assert knn_predict(X, y, x_te, KnnConfig(k=1)) == y[nearest]

    def test_manhattan_metric(self):
        # Euclidean picks row 0 (1.41 vs 1.5), Manhattan picks row 1 (2 vs 1.5)
        X = [[1.0, 1.0], [1.5, 0.0]]
        assert knn_predict(X, [10, 20], [0, 0], KnnConfig(k=1, metric="euclidean")) == 10.0
        assert knn_predict(X, [10, 20], [0, 0], KnnConfig(k=1, metric="manhattan")) == 20.0

    def test_too_few_rows(self):
        with pytest.raises(InsufficientData):
            knn_predict([[1.0]], [1.0], [1.0], KnnConfig(k=2))

    def test_config_validation(self):
        with pytest.raises(InvalidParameter):
            KnnConfig(k=0)
        with pytest.raises(InvalidParameter):
            KnnConfig(metric="cosine")


class TestSelectK:
    def test_picks_smallest_best_k(self):
        # two separated clusters with constant targets: every k up to the cluster size is perfect
        X = [[0.0], [0.1], [0.2], [10.0], [10.1], [10.2]]
        y = [1, 1, 1, 5, 5, 5]
        assert select_knn_k(X, y) == 1

    def test_bounded_by_n_minus_one(self, rng):
        X = rng.normal(size=(4, 2))
        y = rng.normal(size=4)
        assert 1 <= select_knn_k(X, y) <= 3


class TestLinearRegression:
    def test_line_through_two_points(self):
        assert linreg_fit_predict([[0], [1]], [1, 3], [2]) == pytest.approx(5.0)

    def test_interpolates_linear_data(self, linear_dataset):
        X, y = np.array(linear_dataset.X), np.array(linear_dataset.y)
        for row, target in zip(X, y):
            assert abs(linreg_fit_predict(X, y, row) - target) <= 1e-9

    def test_constant_target(self, rng):
        X = rng.normal(size=(6, 2))
        assert linreg_fit_predict(X, [4.0] * 6, [0.3, -1.2]) == pytest.approx(4.0)

    def test_agrees_with_pseudoinverse(self, rng):
        for _ in range(20):
            X = rng.normal(size=(12, 3))
            y = rng.normal(size=12)
            x_te = rng.normal(size=3)
            design = np.hstack([np.ones((12, 1)), X])
            oracle = float(np.concatenate(([1.0], x_te)) @ (np.linalg.pinv(design) @ y))
            assert linreg_fit_predict(X, y, x_te) == pytest.approx(oracle, rel=1e-8, abs=1e-10)

    def test_collinear_design(self):
        with pytest.raises(RankDeficient):
            linreg_fit_predict([[1, 2], [2, 4], [3, 6]], [1, 2, 3], [1, 1])


class TestDecisionTree:
    def test_depth_zero_is_mean(self):
        assert dtree_fit_predict([[0], [1], [2]], [1, 2, 6], [5], TreeConfig(max_depth=0)) == 3.0

    def test_single_split(self):
        X = [[0], [0], [1], [1]]
        y = [0, 0, 10, 10]
        tree = RegressionTree(TreeConfig(max_depth=1, min_leaf=1)).fit(X, y)
        assert tree.predict_one([1]) == 10.0
        assert tree.predict_one([0]) == 0.0
        assert tree.root.threshold == 0.5

    def test_constant_target(self):
        assert dtree_fit_predict([[0], [3], [9]], [2, 2, 2], [4], TreeConfig(max_depth=5, min_leaf=1)) == 2.0

    def test_training_error_non_increasing_in_depth(self, rng):
        X = rng.normal(size=(40, 3))
        y = np.sin(X[:, 0]) + X[:, 1] ** 2 + 0.1 * rng.normal(size=40)
        errors = []
        for depth in range(0, 8):
            tree = RegressionTree(TreeConfig(max_depth=depth, min_leaf=1)).fit(X, y)
            predictions = np.array([tree.predict_one(row) for row in X])
            errors.append(float(np.mean((predictions - y) ** 2)))
        assert all(later <= earlier + 1e-12 for earlier, later in zip(errors, errors[1:]))

    def test_min_leaf_respected(self):
        tree = RegressionTree(TreeConfig(max_depth=4, min_leaf=2)).fit([[0], [1], [2], [3]], [0, 0, 9, 9])
        assert tree.depth() == 1

    def test_too_few_rows(self):
        with pytest.raises(InsufficientData):
            dtree_fit_predict([[1.0]], [1.0], [1.0], TreeConfig(min_leaf=2))

    def test_deterministic(self, rng):
        X = rng.normal(size=(15, 2))
        y = rng.normal(size=15)
        assert dtree_fit_predict(X, y, [0, 0]) == dtree_fit_predict(X, y, [0, 0])


class TestRegistry:
    def test_known_ids(self):
        X, y = [[0.0], [1.0], [2.0]], [0.0, 1.0, 2.0]
        for algorithm in ("knn", "lr", "dt"):
            assert np.isfinite(make_regressor(algorithm)(X, y, [1.0]))

    def test_unknown_id(self):
        with pytest.raises(InvalidParameter):
            make_regressor("svr")


class TestExternalPredictions:
    def test_rows_reordered_by_index(self, write_file):
        path = write_file("svr.csv", "row_index,prediction\n1,2.5\n0,1.5\n")
        np.testing.assert_array_equal(load_external_predictions(path, 2), [1.5, 2.5])

    def test_missing_file(self, tmp_path):
        with pytest.raises(MissingPredictions):
            load_external_predictions(tmp_path / "absent.csv", 2)

    def test_wrong_row_count(self, write_file):
        path = write_file("svr.csv", "row_index,prediction\n0,1\n")
        with pytest.raises(RowCountMismatch):
            load_external_predictions(path, 2)

    def test_bad_header(self, write_file):
        path = write_file("svr.csv", "index,value\n0,1\n")
        with pytest.raises(ParseError):
            load_external_predictions(path, 1)

    def test_duplicate_row(self, write_file):
        path = write_file("svr.csv", "row_index,prediction\n0,1\n0,2\n")
        with pytest.raises(ParseError):
            load_external_predictions(path, 2)

    def test_non_numeric_prediction(self, write_file):
        path = write_file("svr.csv", "row_index,prediction\n0,1.5\n1,n/a\n")
        with pytest.raises(ParseError):
            load_external_predictions(path, 2)

    def test_values_read_back_exactly(self, write_file):
        path = write_file("svr.csv", "row_index,prediction\n0,0.10000000000000001\n1,2.2250738585072014e-308\n")
        np.testing.assert_array_equal(load_external_predictions(path, 2), [0.1, 2.2250738585072014e-308])
