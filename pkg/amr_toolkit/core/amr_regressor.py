"""
Arithmetic Method Regression (AMR)

Handles:
- Model building: one equal-share coefficient row per training instance
- Neighbour selection: every row within delta times the nearest Manhattan distance
- Prediction: alpha-blend of the neighbours' AMA reconstructions and their regressands
- LOOCV grid search over (delta, alpha)
- Closed-form blend cross-check at the grid optimum

A coefficient row depends only on its own training instance, so the model of
LOOCV fold l is the full coefficient matrix without row l. The grid search
caches per-fold distances and reconstructions once and reuses them for every
grid point; all arithmetic goes through the same helpers predict() uses.
"""

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .arithmetic_method import equal_shares, reconstruct_rows
from .data_ingest import Dataset
from .evaluation import mae, mse, r_squared
from .exceptions import (
    ConstantTarget,
    DegenerateInstance,
    EmptyModel,
    InsufficientData,
    InvalidParameter,
    LengthMismatch,
)
from .linalg_theory import empirical_risk, optimal_alpha
from ..models.regression_models import AlphaCrossCheck, GridSearchResult, HyperParams
from ..utils.config import decimal_grid


logger = logging.getLogger(__name__)

DEFAULT_ALPHA_GRID: Tuple[float, ...] = tuple(decimal_grid(0.1, 1.0, 0.1))
DEFAULT_DELTA_GRID: Tuple[float, ...] = tuple(decimal_grid(1.0, 10.0, 0.1))


@dataclass(frozen=True, eq=False)
class AmrModel:
    """Coefficient matrix A_mo with the stored training rows X_mo and regressands Y_mo"""
    A_mo: np.ndarray
    X_mo: np.ndarray
    Y_mo: np.ndarray

    def __post_init__(self):
        if not (self.A_mo.shape[0] == self.X_mo.shape[0] == self.Y_mo.shape[0]):
            raise LengthMismatch("A_mo, X_mo and Y_mo must have the same row count")
        for array in (self.A_mo, self.X_mo, self.Y_mo):
            array.setflags(write=False)

    @property
    def n_rows(self) -> int:
        return int(self.Y_mo.shape[0])

    @property
    def n_cols(self) -> int:
        return int(self.X_mo.shape[1])


@dataclass(frozen=True)
class PredictionTrace:
    """One AMR prediction with both blend components"""
    y_hat: float
    y_hat_ama: float
    y_hat_knn: float
    k: int
    dist_min: float


def _matrix(X) -> np.ndarray:
    return np.atleast_2d(np.array(X, dtype=float))


def coefficient_rows(X: np.ndarray, Y: np.ndarray, literal_index_divisor: bool = False) -> np.ndarray:
    """Equal-share coefficients for every row; DegenerateInstance names the row"""
    A = np.zeros_like(X)
    for q in range(X.shape[0]):
        try:
            A[q], _ = equal_shares(X[q], float(Y[q]), literal_index_divisor)
        except DegenerateInstance as error:
            raise DegenerateInstance(error.message, row_index=q)
    return A


def build_model(X_tr, Y_tr, literal_index_divisor: bool = False) -> AmrModel:
    X = _matrix(X_tr)
    Y = np.array(Y_tr, dtype=float).reshape(-1)
    if X.shape[0] != Y.size:
        raise LengthMismatch(f"X_tr has {X.shape[0]} rows, Y_tr has {Y.size}")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Y))):
        raise InvalidParameter("training data contains non-finite values")
    return AmrModel(A_mo=coefficient_rows(X, Y, literal_index_divisor), X_mo=X, Y_mo=Y)


def manhattan_distance(u: Sequence[float], v: Sequence[float]) -> float:
    u = np.asarray(u, dtype=float).reshape(-1)
    v = np.asarray(v, dtype=float).reshape(-1)
    if u.shape != v.shape:
        raise LengthMismatch(f"vectors have {u.size} and {v.size} entries")
    return float(np.abs(u - v).sum())


def manhattan_distances(X: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Row-wise Manhattan distance of every row of X to x"""
    return np.abs(X - x).sum(axis=1)


def _neighbourhood(distances: np.ndarray, delta: float) -> Tuple[np.ndarray, float]:
    dist_min = float(distances.min())
    return np.flatnonzero(distances <= delta * dist_min), dist_min


def _component(values: np.ndarray, literal_sum: bool) -> float:
    # literal_sum keeps raw sums over the neighbourhood instead of averaging by k
    return float(values.sum()) if literal_sum else float(values.mean())


def _blend(params: HyperParams, y_hat_ama, y_hat_knn):
    return params.alpha * y_hat_ama + params.beta * y_hat_knn


def _check_query(model: AmrModel, x_te) -> np.ndarray:
    if model.n_rows == 0:
        raise EmptyModel("model has no training rows")
    x = np.asarray(x_te, dtype=float).reshape(-1)
    if x.size != model.n_cols:
        raise LengthMismatch(f"query has {x.size} regressors, model has {model.n_cols}")
    return x


def select_neighbors(model: AmrModel, x_te, delta: float) -> Tuple[List[int], float]:
    """Indices q with dist_q <= delta * dist_min (ascending), and dist_min"""
    if delta < 1.0:
        raise InvalidParameter(f"delta must be >= 1, got {delta}")
    x = _check_query(model, x_te)
    indices, dist_min = _neighbourhood(manhattan_distances(model.X_mo, x), delta)
    return [int(q) for q in indices], dist_min


def predict(model: AmrModel, x_te, params: HyperParams, literal_sum: bool = False) -> PredictionTrace:
    x = _check_query(model, x_te)
    indices, dist_min = _neighbourhood(manhattan_distances(model.X_mo, x), params.delta)
    reconstructions = reconstruct_rows(model.A_mo, x)

    y_hat_ama = _component(reconstructions[indices], literal_sum)
    y_hat_knn = _component(model.Y_mo[indices], literal_sum)
    return PredictionTrace(
        y_hat=float(_blend(params, y_hat_ama, y_hat_knn)),
        y_hat_ama=y_hat_ama,
        y_hat_knn=y_hat_knn,
        k=int(indices.size),
        dist_min=dist_min,
    )


@dataclass(frozen=True, eq=False)
class _FoldCache:
    """Everything grid points need from LOOCV fold l"""
    distances: np.ndarray
    reconstructions: np.ndarray
    targets: np.ndarray


@dataclass(frozen=True, eq=False)
class _DeltaComponents:
    y_hat_ama: np.ndarray
    y_hat_knn: np.ndarray
    k: np.ndarray


@dataclass(frozen=True)
class _GridPoint:
    delta: float
    alpha: float
    mae: float


class AmrGridSearch:
    """
    LOOCV grid search for AMR

    Features:
    - delta ascending as the major loop, alpha ascending as the minor loop
    - Optimum updated whenever MAE <= MAE_op, so equal-MAE ties go to the last point scanned
    - Grid rows (one per delta) evaluated on a thread pool, reduced in scan order
    - Per-fold predictions at the optimum kept for prediction files and comparisons
    """

    def __init__(
        self,
        alpha_grid: Sequence[float] = DEFAULT_ALPHA_GRID,
        delta_grid: Sequence[float] = DEFAULT_DELTA_GRID,
        literal_sum: bool = False,
        literal_index_divisor: bool = False,
        workers: int = 1,
    ):
        self.alpha_grid = self._validated(alpha_grid, "alpha", lambda a: 0.0 < a <= 1.0, "(0, 1]")
        self.delta_grid = self._validated(delta_grid, "delta", lambda d: 1.0 <= d <= 10.0, "[1, 10]")
        self.literal_sum = literal_sum
        self.literal_index_divisor = literal_index_divisor
        self.workers = max(1, int(workers))

        # filled by run()
        self.predictions: Optional[np.ndarray] = None
        self.traces: List[PredictionTrace] = []
        self.evaluated: List[_GridPoint] = []

    @staticmethod
    def _validated(grid: Sequence[float], name: str, inside, interval: str) -> Tuple[float, ...]:
        values = tuple(sorted(float(v) for v in grid))
        if not values:
            raise InvalidParameter(f"{name} grid must not be empty")
        outside = [v for v in values if not inside(v)]
        if outside:
            raise InvalidParameter(f"{name} grid values {outside} outside {interval}")
        return values

    def _fold_caches(self, dataset: Dataset) -> List[_FoldCache]:
        X = np.array(dataset.X, dtype=float)
        y = np.array(dataset.y, dtype=float)
        try:
            A = coefficient_rows(X, y, self.literal_index_divisor)
        except DegenerateInstance as error:
            # the first fold whose training set contains the row
            raise error.with_fold(0 if error.row_index else 1)

        caches = []
        for l in range(dataset.n):
            X_fold = np.delete(X, l, axis=0)
            A_fold = np.delete(A, l, axis=0)
            caches.append(
                _FoldCache(
                    distances=manhattan_distances(X_fold, X[l]),
                    reconstructions=reconstruct_rows(A_fold, X[l]),
                    targets=np.delete(y, l),
                )
            )
        return caches

    def _components(self, caches: List[_FoldCache], delta: float) -> _DeltaComponents:
        n = len(caches)
        ama, knn, k = np.empty(n), np.empty(n), np.empty(n, dtype=int)
        for l, cache in enumerate(caches):
            indices, _ = _neighbourhood(cache.distances, delta)
            ama[l] = _component(cache.reconstructions[indices], self.literal_sum)
            knn[l] = _component(cache.targets[indices], self.literal_sum)
            k[l] = indices.size
        return _DeltaComponents(y_hat_ama=ama, y_hat_knn=knn, k=k)

    def _scan_delta(self, caches: List[_FoldCache], y: np.ndarray, delta: float) -> List[_GridPoint]:
        components = self._components(caches, delta)
        points = []
        for alpha in self.alpha_grid:
            params = HyperParams.from_alpha(alpha, delta)
            predictions = _blend(params, components.y_hat_ama, components.y_hat_knn)
            point = _GridPoint(delta=delta, alpha=alpha, mae=mae(y, predictions))
            logger.debug(f"delta={delta} alpha={alpha} MAE={point.mae:.6g}")
            points.append(point)
        return points

    def run(self, dataset: Dataset) -> GridSearchResult:
        if dataset.n < 2:
            raise InsufficientData("grid search needs at least 2 rows")

        t_start = time.perf_counter()
        y = np.array(dataset.y, dtype=float)
        caches = self._fold_caches(dataset)

        if self.workers > 1:
            with ThreadPoolExecutor(max_workers=self.workers) as pool:
                rows = list(pool.map(lambda d: self._scan_delta(caches, y, d), self.delta_grid))
        else:
            rows = [self._scan_delta(caches, y, d) for d in self.delta_grid]

        best: Optional[_GridPoint] = None
        self.evaluated = [point for row in rows for point in row]
        for point in self.evaluated:
            if best is None or point.mae <= best.mae:
                best = point

        params = HyperParams.from_alpha(best.alpha, best.delta)
        components = self._components(caches, best.delta)
        predictions = _blend(params, components.y_hat_ama, components.y_hat_knn)
        try:
            r2_op: Optional[float] = r_squared(y, predictions)
        except ConstantTarget:
            r2_op = None
        mse_op = mse(y, predictions)
        et_seconds = time.perf_counter() - t_start

        self.predictions = np.asarray(predictions, dtype=float)
        self.traces = [
            PredictionTrace(
                y_hat=float(predictions[l]),
                y_hat_ama=float(components.y_hat_ama[l]),
                y_hat_knn=float(components.y_hat_knn[l]),
                k=int(components.k[l]),
                dist_min=float(caches[l].distances.min()),
            )
            for l in range(dataset.n)
        ]

        result = GridSearchResult(
            mae_op=best.mae,
            mse_op=mse_op,
            rmse_op=math.sqrt(mse_op),
            r2_op=r2_op,
            alpha_op=params.alpha,
            beta_op=params.beta,
            delta_op=params.delta,
            k_op=max(1, int(math.floor(float(components.k.mean()) + 0.5))),
            et_seconds=et_seconds,
            k_last=int(components.k[-1]),
            evaluated_points=len(self.evaluated),
        )
        logger.info(
            f"{dataset.name}: AMR optimum MAE={result.mae_op:.6g} at alpha={result.alpha_op}, "
            f"delta={result.delta_op}, k_op={result.k_op} ({result.evaluated_points} grid points, "
            f"{et_seconds:.2f}s)"
        )
        return result

    def components_at(self, dataset: Dataset, delta: float) -> Tuple[np.ndarray, np.ndarray]:
        """Per-fold AMA and k-NN component predictions at one delta"""
        components = self._components(self._fold_caches(dataset), delta)
        return components.y_hat_ama, components.y_hat_knn


def grid_search_loocv(
    dataset: Dataset,
    alpha_grid: Sequence[float] = DEFAULT_ALPHA_GRID,
    delta_grid: Sequence[float] = DEFAULT_DELTA_GRID,
    literal_sum: bool = False,
    literal_index_divisor: bool = False,
    workers: int = 1,
) -> GridSearchResult:
    search = AmrGridSearch(alpha_grid, delta_grid, literal_sum, literal_index_divisor, workers)
    return search.run(dataset)


def cross_check_alpha(
    dataset: Dataset,
    result: GridSearchResult,
    literal_sum: bool = False,
    literal_index_divisor: bool = False,
) -> AlphaCrossCheck:
    """
    Closed-form alpha at the grid's delta_op

    Raises IdenticalPredictors when the AMA and k-NN components agree on
    every fold.
    """

    search = AmrGridSearch(
        alpha_grid=(result.alpha_op,),
        delta_grid=(result.delta_op,),
        literal_sum=literal_sum,
        literal_index_divisor=literal_index_divisor,
    )
    u, v = search.components_at(dataset, result.delta_op)
    y = np.asarray(dataset.y, dtype=float)

    alpha_hat = optimal_alpha(y, u, v)
    clipped = min(1.0, max(0.0, alpha_hat))
    return AlphaCrossCheck(
        delta=result.delta_op,
        alpha_op=result.alpha_op,
        alpha_hat=alpha_hat,
        alpha_hat_clipped=clipped,
        risk_at_alpha_hat=empirical_risk(y, u, v, alpha_hat),
        risk_at_alpha_hat_clipped=empirical_risk(y, u, v, clipped),
        risk_at_alpha_op=empirical_risk(y, u, v, result.alpha_op),
    )
