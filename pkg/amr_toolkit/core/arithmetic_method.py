"""
Arithmetic Method for single linear equations

Handles:
- Forward solve: coefficients + target -> equal-share solution
- Inverse fit: regressors + target -> equal-share coefficients
- Exact reconstruction of the target from a coefficient/solution pair
- The randomized numerical validation sweep over dimension counts

Equal-share rule: with p active (nonzero) dimensions every active product
a[j] * x[j] carries y / p, so the products sum back to y. Inactive
dimensions get a zero share.
"""

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence, Tuple

import numpy as np

from .exceptions import DegenerateInstance, EmptyVector, InvalidParameter, LengthMismatch
from ..models.regression_models import ValidationRecord
from ..utils.seeding import generator_for


logger = logging.getLogger(__name__)

DEFAULT_VALUE_RANGE: Tuple[float, float] = (-1000.0, 1000.0)
MIN_ABS_TARGET = 1e-3


@dataclass(frozen=True)
class AmaDecomposition:
    """Coefficient/solution pair that reconstructs its target"""
    a: np.ndarray
    x: np.ndarray
    y: float
    y_hat: float
    p: int


def _as_vector(values: Sequence[float], name: str) -> np.ndarray:
    vector = np.asarray(values, dtype=float).reshape(-1)
    if vector.size == 0:
        raise EmptyVector(f"{name} must not be empty")
    if not np.all(np.isfinite(vector)):
        raise InvalidParameter(f"{name} contains non-finite entries")
    return vector


def equal_shares(
    known: np.ndarray,
    y: float,
    literal_index_divisor: bool = False,
) -> Tuple[np.ndarray, int]:
    """
    Solve known[j] * unknown[j] = y / p for every active j

    Works in both directions: known=coefficients gives the solution vector,
    known=regressors gives the coefficient vector. With
    literal_index_divisor the divisor is the 1-based position j instead of p,
    which makes the reconstruction grow like y * H_p.
    """

    active = known != 0.0
    p = int(np.count_nonzero(active))
    unknown = np.zeros_like(known, dtype=float)

    if p == 0:
        if y != 0.0:
            raise DegenerateInstance("all entries are zero but the target is not")
        return unknown, 0

    if literal_index_divisor:
        positions = np.arange(1, known.size + 1, dtype=float)
        unknown[active] = y / (positions[active] * known[active])
    else:
        unknown[active] = y / (p * known[active])
    return unknown, p


def solve_row(a: Sequence[float], y: float, literal_index_divisor: bool = False) -> np.ndarray:
    """Equal-share solution x of a . x = y"""
    coefficients = _as_vector(a, "a")
    x, _ = equal_shares(coefficients, float(y), literal_index_divisor)
    return x


def reconstruct(a: Sequence[float], x: Sequence[float]) -> float:
    """Dot product sum(a[j] * x[j])"""
    a = np.asarray(a, dtype=float).reshape(-1)
    x = np.asarray(x, dtype=float).reshape(-1)
    if a.shape != x.shape:
        raise LengthMismatch(f"a has {a.size} entries, x has {x.size}")
    return float(np.multiply(a, x).sum())


def reconstruct_rows(A: np.ndarray, x: np.ndarray) -> np.ndarray:
    """
    Row-wise reconstruct(A[q], x) for every q

    Each row is reduced on its own, so the value for a row is identical to
    reconstruct(A[q], x) regardless of which other rows are present.
    """
    return np.multiply(A, x).sum(axis=1)


def fit_instance(x: Sequence[float], y: float, literal_index_divisor: bool = False) -> AmaDecomposition:
    """Equal-share coefficients a for one training instance (x, y)"""
    regressors = _as_vector(x, "x")
    a, p = equal_shares(regressors, float(y), literal_index_divisor)
    return AmaDecomposition(a=a, x=regressors, y=float(y), y_hat=reconstruct(a, regressors), p=p)


def percentage_error(y: float, y_hat: float) -> float:
    if y == 0.0:
        return 0.0 if y_hat == 0.0 else float("inf")
    return abs(y_hat - y) / abs(y) * 100.0


class ArithmeticMethodValidator:
    """
    Randomized validation of the arithmetic method

    For each requested dimension count i: draw i coefficients and a target
    uniformly in value_range (targets with |y| < 1e-3 are redrawn), solve,
    reconstruct, and record the percentage error and the wall time.

    Each checkpoint has its own labelled random stream, so records do not
    depend on which other checkpoints are run or on the worker count.
    """

    def __init__(
        self,
        value_range: Tuple[float, float] = DEFAULT_VALUE_RANGE,
        literal_index_divisor: bool = False,
        workers: int = 1,
    ):
        low, high = value_range
        if not low < high:
            raise InvalidParameter(f"empty value range {value_range}")
        if max(abs(low), abs(high)) < MIN_ABS_TARGET:
            raise InvalidParameter("value range must reach beyond |y| >= 1e-3")
        self.value_range = (float(low), float(high))
        self.literal_index_divisor = literal_index_divisor
        self.workers = max(1, int(workers))

    def _draw_target(self, rng: np.random.Generator) -> float:
        low, high = self.value_range
        while True:
            y = float(rng.uniform(low, high))
            if abs(y) >= MIN_ABS_TARGET:
                return y

    def run_checkpoint(self, i: int, seed: int) -> ValidationRecord:
        rng = generator_for(seed, f"ama-validate:{i}")
        low, high = self.value_range

        t_start = time.perf_counter()
        a = rng.uniform(low, high, size=i)
        y = self._draw_target(rng)
        x = solve_row(a, y, self.literal_index_divisor)
        y_hat = reconstruct(a, x)
        elapsed = time.perf_counter() - t_start

        return ValidationRecord(i=i, y=y, y_hat=y_hat, t=elapsed, eps=percentage_error(y, y_hat))

    def run(self, checkpoints: Sequence[int], seed: int) -> Iterator[ValidationRecord]:
        """Yield one record per checkpoint in ascending dimension order"""
        ordered = sorted(set(int(c) for c in checkpoints))
        if not ordered:
            raise InvalidParameter("at least one checkpoint is required")
        if ordered[0] < 1:
            raise InvalidParameter("checkpoints must be positive")

        logger.info(f"AMA validation: {len(ordered)} checkpoints up to i={ordered[-1]}")

        if self.workers == 1:
            for i in ordered:
                yield self.run_checkpoint(i, seed)
            return

        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            # map preserves submission order
            yield from pool.map(lambda i: self.run_checkpoint(i, seed), ordered)


def ama_validate(
    m_max: Optional[int] = None,
    value_range: Tuple[float, float] = DEFAULT_VALUE_RANGE,
    seed: int = 0,
    checkpoints: Optional[Sequence[int]] = None,
    literal_index_divisor: bool = False,
    workers: int = 1,
) -> Iterator[ValidationRecord]:
    """
    Validation sweep

    Either every dimension count 1..m_max (the full, quadratic-cost sweep) or
    an explicit checkpoint list.
    """

    if checkpoints is None:
        if m_max is None or m_max < 1:
            raise InvalidParameter("m_max must be >= 1 when no checkpoints are given")
        checkpoints = range(1, m_max + 1)

    validator = ArithmeticMethodValidator(value_range, literal_index_divisor, workers)
    return validator.run(checkpoints, seed)
