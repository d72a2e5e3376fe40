"""
Evaluation machinery

Handles:
- Leave-one-out driver for any fit-predict procedure
- MAE / MSE / RMSE / R² through sklearn.metrics
- Two-tailed paired permutation test on per-instance absolute errors
- The optimal-inference decision rule
"""

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Dict, Optional, Sequence, Tuple

import numpy as np
from sklearn.metrics import mean_absolute_error, mean_squared_error, r2_score
from sklearn.model_selection import LeaveOneOut

from .exceptions import AmrToolkitError, ConstantTarget, InsufficientData, InvalidParameter, LengthMismatch
from ..models.regression_models import Decision, EtPreference, MetricSet, PermTestResult, Verdict
from ..utils.seeding import counter_generator


logger = logging.getLogger(__name__)

# fit on (X_tr, Y_tr), predict x_te
FitPredict = Callable[[np.ndarray, np.ndarray, np.ndarray], float]

EXHAUSTIVE_MAX_N = 20
ENUMERATION_BLOCK = 1 << 14
DRAW_BLOCK = 4096
DEFAULT_P_THRESHOLD = 0.05


def _paired(actual: Sequence[float], predicted: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
    actual = np.asarray(actual, dtype=float).reshape(-1)
    predicted = np.asarray(predicted, dtype=float).reshape(-1)
    if actual.size != predicted.size:
        raise LengthMismatch(f"{actual.size} actual values but {predicted.size} predictions")
    if actual.size == 0:
        raise LengthMismatch("metric vectors must not be empty")
    if not (np.all(np.isfinite(actual)) and np.all(np.isfinite(predicted))):
        raise InvalidParameter("metric vectors contain non-finite values")
    return actual, predicted


def mae(actual: Sequence[float], predicted: Sequence[float]) -> float:
    actual, predicted = _paired(actual, predicted)
    return float(mean_absolute_error(actual, predicted))


def mse(actual: Sequence[float], predicted: Sequence[float]) -> float:
    actual, predicted = _paired(actual, predicted)
    return float(mean_squared_error(actual, predicted))


def rmse(actual: Sequence[float], predicted: Sequence[float]) -> float:
    return math.sqrt(mse(actual, predicted))


def r_squared(actual: Sequence[float], predicted: Sequence[float]) -> float:
    """1 - SS_res / SS_tot; negative when worse than predicting the mean"""
    actual, predicted = _paired(actual, predicted)
    if actual.size < 2 or not np.any(actual != actual[0]):
        raise ConstantTarget("R² is undefined for a constant target (SS_tot == 0)")
    return float(r2_score(actual, predicted))


def absolute_errors(actual: Sequence[float], predicted: Sequence[float]) -> np.ndarray:
    actual, predicted = _paired(actual, predicted)
    return np.abs(actual - predicted)


def loocv(
    X: np.ndarray,
    y: np.ndarray,
    regressor: FitPredict,
    workers: int = 1,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Leave-one-out predictions in row order

    Every fold gets freshly sliced training arrays, so nothing a regressor
    does to its inputs can leak into another fold.
    """

    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).reshape(-1)
    n = y.size
    if X.shape[0] != n:
        raise LengthMismatch(f"X has {X.shape[0]} rows, y has {n}")
    if n < 2:
        raise InsufficientData("LOOCV needs at least 2 rows")

    def run_fold(split: Tuple[np.ndarray, np.ndarray]) -> float:
        train, test = split
        fold = int(test[0])
        try:
            return float(regressor(X[train], y[train], X[fold].copy()))
        except AmrToolkitError as error:
            raise error.with_fold(fold)

    splits = list(LeaveOneOut().split(X))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            predictions = list(pool.map(run_fold, splits))
    else:
        predictions = [run_fold(split) for split in splits]

    return y.copy(), np.asarray(predictions, dtype=float)


def build_metric_set(
    actual: Sequence[float],
    predicted: Sequence[float],
    et: float = 0.0,
    algorithm: Optional[str] = None,
    dataset: Optional[str] = None,
    fingerprint: Optional[str] = None,
    details: Optional[Dict[str, Any]] = None,
) -> MetricSet:
    """MetricSet for one algorithm; r2 is None on a constant target"""
    actual, predicted = _paired(actual, predicted)
    mse_value = mse(actual, predicted)
    try:
        r2_value: Optional[float] = r_squared(actual, predicted)
    except ConstantTarget:
        logger.warning(f"{algorithm or 'algorithm'} on {dataset or 'dataset'}: constant target, R² left empty")
        r2_value = None

    return MetricSet(
        mae=mae(actual, predicted),
        mse=mse_value,
        rmse=math.sqrt(mse_value),
        r2=r2_value,
        et=max(0.0, et),
        algorithm=algorithm,
        dataset=dataset,
        n=int(actual.size),
        fingerprint=fingerprint,
        details=details or {},
    )


def timed(fn: Callable[[], Any]) -> Tuple[Any, float]:
    """Run fn and return (result, monotonic wall seconds)"""
    t_start = time.perf_counter()
    result = fn()
    return result, time.perf_counter() - t_start


class PermutationTester:
    """
    Two-tailed paired permutation test

    Features:
    - Statistic: mean(err_A) - mean(err_B), i.e. the MAE difference
    - Null distribution by swapping each pair independently (sign flips of the differences)
    - Exhaustive enumeration of all 2^n assignments when n <= 20
    - Monte Carlo otherwise, drawn in fixed Philox blocks with add-one smoothing
    """

    def __init__(self, n_perm: int = 5000, seed: int = 0, workers: int = 1):
        if n_perm < 1:
            raise InvalidParameter("n_perm must be >= 1")
        self.n_perm = int(n_perm)
        self.seed = int(seed)
        self.workers = max(1, int(workers))

    @staticmethod
    def _tolerance(differences: np.ndarray, observed: float) -> float:
        scale = max(1.0, observed, float(np.abs(differences).mean()))
        return 1e-12 * scale

    @staticmethod
    def _count_extreme(signs: np.ndarray, differences: np.ndarray, threshold: float) -> int:
        stats = (signs @ differences) / differences.size
        return int(np.count_nonzero(np.abs(stats) >= threshold))

    def _exhaustive(self, differences: np.ndarray, threshold: float) -> Tuple[int, int]:
        n = differences.size
        total = 1 << n
        bits = np.arange(n, dtype=np.int64)
        extreme = 0
        for start in range(0, total, ENUMERATION_BLOCK):
            codes = np.arange(start, min(start + ENUMERATION_BLOCK, total), dtype=np.int64)
            signs = 1.0 - 2.0 * ((codes[:, None] >> bits) & 1)
            extreme += self._count_extreme(signs, differences, threshold)
        return extreme, total

    def _draw_block(self, block: int, size: int, differences: np.ndarray, threshold: float) -> int:
        rng = counter_generator(self.seed, block)
        signs = 1.0 - 2.0 * rng.integers(0, 2, size=(size, differences.size))
        return self._count_extreme(signs, differences, threshold)

    def _monte_carlo(self, differences: np.ndarray, threshold: float) -> int:
        blocks = [
            (b, min(DRAW_BLOCK, self.n_perm - b * DRAW_BLOCK))
            for b in range((self.n_perm + DRAW_BLOCK - 1) // DRAW_BLOCK)
        ]
        if self.workers > 1:
            with ThreadPoolExecutor(max_workers=self.workers) as pool:
                counts = pool.map(lambda job: self._draw_block(job[0], job[1], differences, threshold), blocks)
                return int(sum(counts))
        return sum(self._draw_block(b, size, differences, threshold) for b, size in blocks)

    def test(
        self,
        err_A: Sequence[float],
        err_B: Sequence[float],
        force_monte_carlo: bool = False,
    ) -> PermTestResult:
        err_A, err_B = _paired(err_A, err_B)
        differences = err_A - err_B
        dif_obs = float(np.mean(err_A) - np.mean(err_B))
        observed = abs(dif_obs)
        threshold = observed - self._tolerance(differences, observed)

        if differences.size <= EXHAUSTIVE_MAX_N and not force_monte_carlo:
            extreme, total = self._exhaustive(differences, threshold)
            result = PermTestResult(
                dif_obs=dif_obs, p_value=extreme / total, n_perms=total, exhaustive=True, seed=self.seed
            )
        else:
            extreme = self._monte_carlo(differences, threshold)
            result = PermTestResult(
                dif_obs=dif_obs,
                p_value=(1 + extreme) / (1 + self.n_perm),
                n_perms=self.n_perm,
                exhaustive=False,
                seed=self.seed,
            )

        logger.debug(
            f"permutation test: dif_obs={dif_obs:.6g} p={result.p_value:.6g} "
            f"({'exhaustive' if result.exhaustive else 'monte carlo'}, {result.n_perms} permutations)"
        )
        return result


def permutation_test(
    err_A: Sequence[float],
    err_B: Sequence[float],
    n_perm: int = 5000,
    seed: int = 0,
    workers: int = 1,
) -> PermTestResult:
    return PermutationTester(n_perm, seed, workers).test(err_A, err_B)


def _lower(a: Optional[float], b: Optional[float], higher_is_better: bool = False) -> str:
    if a is None or b is None:
        return "n/a"
    if a == b:
        return "tie"
    if higher_is_better:
        return "A" if a > b else "B"
    return "A" if a < b else "B"


def decision_rule(
    report_A: MetricSet,
    report_B: MetricSet,
    perm: PermTestResult,
    p_threshold: float = DEFAULT_P_THRESHOLD,
) -> Verdict:
    """
    MAE-first verdict

    A significant MAE difference decides; otherwise the pair is similar and
    the lower ET is preferred. MSE, RMSE and R² are attached as annotations
    and never override the MAE verdict.
    """

    significant = perm.p_value < p_threshold and perm.dif_obs != 0.0
    if significant and perm.dif_obs < 0:
        decision = Decision.A_BETTER
    elif significant and perm.dif_obs > 0:
        decision = Decision.B_BETTER
    else:
        decision = Decision.SIMILAR

    et_preference = None
    if decision == Decision.SIMILAR and report_A.et != report_B.et:
        et_preference = EtPreference.A if report_A.et < report_B.et else EtPreference.B

    mae_side = "A" if perm.dif_obs < 0 else "B" if perm.dif_obs > 0 else "tie"
    annotations = {
        "p_threshold": p_threshold,
        "mse": _lower(report_A.mse, report_B.mse),
        "rmse": _lower(report_A.rmse, report_B.rmse),
        "r2": _lower(report_A.r2, report_B.r2, higher_is_better=True),
    }
    annotations["consistent_with_mae"] = all(
        annotations[key] in (mae_side, "tie", "n/a") for key in ("mse", "rmse", "r2")
    )

    return Verdict(
        decision=decision,
        significant=significant,
        et_preference=et_preference,
        annotations=annotations,
    )
