"""
Baseline regressors

Handles:
- k-NN regression (Euclidean or Manhattan, lower row index wins distance ties)
- k selection by LOOCV when no k is configured
- Ordinary least squares with an intercept, solved by the normal equations
- CART regression tree with variance-reduction splits
- The algorithm registry used by the CLI and external prediction files

Every baseline is a pure fit-predict function: identical inputs give
identical outputs, and no state outlives a call.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np
import pandas as pd

from .evaluation import FitPredict, mae
from .exceptions import InsufficientData, InvalidParameter, MissingPredictions, ParseError, RowCountMismatch
from .linalg_theory import least_squares
from ..utils.file_io import index_column, numeric_column, read_table


logger = logging.getLogger(__name__)

KNN_METRICS = ("euclidean", "manhattan")
MAX_SELECTED_K = 25


@dataclass(frozen=True)
class KnnConfig:
    k: int = 1
    metric: str = "euclidean"

    def __post_init__(self):
        if self.k < 1:
            raise InvalidParameter(f"k must be >= 1, got {self.k}")
        if self.metric not in KNN_METRICS:
            raise InvalidParameter(f"unknown k-NN metric {self.metric!r}")


@dataclass(frozen=True)
class TreeConfig:
    max_depth: int = 8
    min_leaf: int = 2

    def __post_init__(self):
        if self.max_depth < 0:
            raise InvalidParameter("max_depth must be >= 0")
        if self.min_leaf < 1:
            raise InvalidParameter("min_leaf must be >= 1")


def _training(X_tr, Y_tr) -> Tuple[np.ndarray, np.ndarray]:
    X = np.atleast_2d(np.asarray(X_tr, dtype=float))
    Y = np.asarray(Y_tr, dtype=float).reshape(-1)
    if X.shape[0] != Y.size:
        raise InvalidParameter(f"X_tr has {X.shape[0]} rows, Y_tr has {Y.size}")
    return X, Y


# k-NN

def knn_distances(X: np.ndarray, x: np.ndarray, metric: str) -> np.ndarray:
    difference = X - x
    if metric == "manhattan":
        return np.abs(difference).sum(axis=1)
    return np.sqrt((difference * difference).sum(axis=1))


def knn_predict(X_tr, Y_tr, x_te, config: KnnConfig) -> float:
    """Mean regressand of the k nearest rows"""
    X, Y = _training(X_tr, Y_tr)
    if Y.size < config.k:
        raise InsufficientData(f"k={config.k} neighbours requested from {Y.size} training rows")
    x = np.asarray(x_te, dtype=float).reshape(-1)
    order = np.argsort(knn_distances(X, x, config.metric), kind="stable")
    return float(Y[order[: config.k]].mean())


def select_knn_k(X, y, metric: str = "euclidean", max_k: int = MAX_SELECTED_K) -> int:
    """
    k in 1..min(max_k, n - 1) with the lowest LOOCV MAE (smaller k on ties)

    Each fold's neighbour order is computed once; running means over that
    order give the prediction for every k at once.
    """

    X, y = _training(X, y)
    n = y.size
    if n < 2:
        raise InsufficientData("k selection needs at least 2 rows")
    k_max = min(max_k, n - 1)

    predictions = np.empty((k_max, n))
    for l in range(n):
        X_fold = np.delete(X, l, axis=0)
        y_fold = np.delete(y, l)
        order = np.argsort(knn_distances(X_fold, X[l], metric), kind="stable")[:k_max]
        running = np.cumsum(y_fold[order])
        predictions[:, l] = running / np.arange(1, k_max + 1)

    scores = [mae(y, predictions[k - 1]) for k in range(1, k_max + 1)]
    best_k = 1 + int(np.argmin(scores))
    logger.info(f"k-NN: selected k={best_k} by LOOCV (MAE {scores[best_k - 1]:.6g})")
    return best_k


# Linear regression

def design_matrix(X: np.ndarray) -> np.ndarray:
    return np.hstack([np.ones((X.shape[0], 1)), X])


def linreg_fit_predict(X_tr, Y_tr, x_te) -> float:
    """[1, x_te] . x_LS with x_LS the least-squares fit of the intercept design"""
    X, Y = _training(X_tr, Y_tr)
    coefficients = least_squares(design_matrix(X), Y)
    x = np.asarray(x_te, dtype=float).reshape(-1)
    return float(np.concatenate(([1.0], x)) @ coefficients)


# Decision tree

@dataclass
class TreeNode:
    value: float
    feature: Optional[int] = None
    threshold: float = 0.0
    left: Optional["TreeNode"] = None
    right: Optional["TreeNode"] = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None


class RegressionTree:
    """
    CART regressor

    Features:
    - Greedy binary splits minimising the summed child squared error
    - Thresholds at midpoints between adjacent distinct sorted values
    - Ties go to the lower feature index, then the lower threshold
    - Leaves predict the mean regressand
    """

    def __init__(self, config: TreeConfig = TreeConfig()):
        self.config = config
        self.root: Optional[TreeNode] = None

    @staticmethod
    def _sse(values: np.ndarray) -> float:
        centered = values - values.mean()
        return float(centered @ centered)

    def _best_split(self, X: np.ndarray, Y: np.ndarray) -> Optional[Tuple[int, float]]:
        n = Y.size
        min_leaf = self.config.min_leaf
        parent = self._sse(Y)
        best: Optional[Tuple[int, float]] = None
        best_error = parent - 1e-12 * max(1.0, parent)

        for feature in range(X.shape[1]):
            order = np.argsort(X[:, feature], kind="stable")
            values = X[order, feature]
            targets = Y[order]
            sums = np.cumsum(targets)
            squares = np.cumsum(targets * targets)

            # candidate i puts the first i sorted rows on the left
            sizes = np.arange(min_leaf, n - min_leaf + 1)
            if sizes.size == 0:
                continue
            left_sum, left_sq = sums[sizes - 1], squares[sizes - 1]
            left_error = left_sq - left_sum ** 2 / sizes
            right_error = (squares[-1] - left_sq) - (sums[-1] - left_sum) ** 2 / (n - sizes)
            errors = np.maximum(left_error, 0.0) + np.maximum(right_error, 0.0)
            errors[values[sizes - 1] == values[sizes]] = np.inf

            candidate = int(np.argmin(errors))
            if errors[candidate] < best_error:
                i = int(sizes[candidate])
                best_error = float(errors[candidate])
                best = (feature, float((values[i - 1] + values[i]) / 2.0))
        return best

    def _grow(self, X: np.ndarray, Y: np.ndarray, depth: int) -> TreeNode:
        node = TreeNode(value=float(Y.mean()))
        if depth >= self.config.max_depth or Y.size < 2 * self.config.min_leaf or np.all(Y == Y[0]):
            return node

        split = self._best_split(X, Y)
        if split is None:
            return node

        node.feature, node.threshold = split
        goes_left = X[:, node.feature] <= node.threshold
        node.left = self._grow(X[goes_left], Y[goes_left], depth + 1)
        node.right = self._grow(X[~goes_left], Y[~goes_left], depth + 1)
        return node

    def fit(self, X_tr, Y_tr) -> "RegressionTree":
        X, Y = _training(X_tr, Y_tr)
        if Y.size < max(1, self.config.min_leaf):
            raise InsufficientData(f"{Y.size} rows cannot fill a leaf of {self.config.min_leaf}")
        self.root = self._grow(X, Y, 0)
        return self

    def predict_one(self, x_te) -> float:
        if self.root is None:
            raise InvalidParameter("tree is not fitted")
        x = np.asarray(x_te, dtype=float).reshape(-1)
        node = self.root
        while not node.is_leaf:
            node = node.left if x[node.feature] <= node.threshold else node.right
        return node.value

    def depth(self) -> int:
        def walk(node: Optional[TreeNode]) -> int:
            if node is None or node.is_leaf:
                return 0
            return 1 + max(walk(node.left), walk(node.right))
        return walk(self.root)


def dtree_fit_predict(X_tr, Y_tr, x_te, config: TreeConfig = TreeConfig()) -> float:
    return RegressionTree(config).fit(X_tr, Y_tr).predict_one(x_te)


# Registry

BASELINE_IDS = ("knn", "lr", "dt")


def make_regressor(
    algorithm: str,
    knn: Optional[KnnConfig] = None,
    tree: Optional[TreeConfig] = None,
) -> FitPredict:
    """Fit-predict callable for a baseline identifier"""
    if algorithm == "knn":
        config = knn or KnnConfig()
        return lambda X_tr, Y_tr, x_te: knn_predict(X_tr, Y_tr, x_te, config)
    if algorithm == "lr":
        return linreg_fit_predict
    if algorithm == "dt":
        tree_config = tree or TreeConfig()
        return lambda X_tr, Y_tr, x_te: dtree_fit_predict(X_tr, Y_tr, x_te, tree_config)
    raise InvalidParameter(f"unknown baseline {algorithm!r}; expected one of {', '.join(BASELINE_IDS)}")


# External predictions

def load_external_predictions(path: Union[str, Path], n_rows: int) -> np.ndarray:
    """
    Per-instance predictions produced elsewhere (columns row_index,prediction)

    row_index is 0-based in dataset order; every row must appear exactly once.
    """

    path = Path(path)
    if not path.exists():
        raise MissingPredictions(f"prediction file not found: {path}")

    frame = read_table(path, ["row_index", "prediction"])
    row_index = index_column(frame, "row_index", path.name)
    values = numeric_column(frame, "prediction", path.name)
    duplicated = pd.Series(row_index).duplicated().to_numpy()
    if duplicated.any():
        raise ParseError(f"{path.name}: duplicate row_index {row_index[np.argmax(duplicated)]}")

    if row_index.size != n_rows:
        raise RowCountMismatch(f"{path.name}: {row_index.size} predictions for {n_rows} rows")
    missing = np.setdiff1d(np.arange(n_rows), row_index)
    if missing.size:
        raise MissingPredictions(f"{path.name}: no prediction for rows {missing[:10].tolist()}")
    return values[np.argsort(row_index)]
