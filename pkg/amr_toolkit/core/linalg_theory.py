"""
Linear-algebra theory checks for the arithmetic method

Handles:
- Least-squares solve through the normal equations with a pivot rank check
- Spectral norm by power iteration
- The AMA operator of one equation and its pseudoinverse counterpart
- Residual bound, deviation bound, existence and stability probes
- The MSE-optimal blend coefficient and its empirical risk

The multi-row AMA operator is never built explicitly; the arithmetic method
is applied one equation (row) at a time, the way the regressor uses it.
"""

import logging
import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from .arithmetic_method import equal_shares, solve_row
from .exceptions import (
    DegenerateInstance,
    IdenticalPredictors,
    InvalidParameter,
    LengthMismatch,
    NonConvergence,
    RankDeficient,
)
from ..models.regression_models import BoundReport, ExistenceReport


logger = logging.getLogger(__name__)

PIVOT_TOLERANCE = 1e-10
POWER_TOLERANCE = 1e-8
POWER_MAX_ITER = 10_000
POWER_SEED = 7


@dataclass(frozen=True)
class DenseMatrix:
    """Row-major real matrix with shape bookkeeping"""
    m: int
    n: int
    entries: Tuple[float, ...]

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise InvalidParameter("matrix dimensions must be positive")
        if len(self.entries) != self.m * self.n:
            raise InvalidParameter(f"expected {self.m * self.n} entries, got {len(self.entries)}")
        if not all(math.isfinite(v) for v in self.entries):
            raise InvalidParameter("matrix entries must be finite")

    @classmethod
    def from_array(cls, array) -> "DenseMatrix":
        array = np.atleast_2d(np.asarray(array, dtype=float))
        m, n = array.shape
        return cls(m=m, n=n, entries=tuple(float(v) for v in array.reshape(-1)))

    def to_array(self) -> np.ndarray:
        return np.asarray(self.entries, dtype=float).reshape(self.m, self.n)

    def transpose(self) -> "DenseMatrix":
        return DenseMatrix.from_array(self.to_array().T)


def _matrix(A) -> np.ndarray:
    if isinstance(A, DenseMatrix):
        return A.to_array()
    array = np.atleast_2d(np.asarray(A, dtype=float))
    if not np.all(np.isfinite(array)):
        raise InvalidParameter("matrix entries must be finite")
    return array


def _solve_normal_equations(gram: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """
    Solve gram @ x = rhs by Gaussian elimination with partial pivoting

    Raises RankDeficient when a pivot falls below PIVOT_TOLERANCE relative to
    the largest pivot seen.
    """

    n = gram.shape[0]
    M = np.hstack([gram.astype(float), rhs.reshape(-1, 1).astype(float)])
    largest = 0.0

    for col in range(n):
        pivot_row = col + int(np.argmax(np.abs(M[col:, col])))
        pivot = abs(M[pivot_row, col])
        largest = max(largest, pivot)
        if largest == 0.0 or pivot <= PIVOT_TOLERANCE * largest:
            raise RankDeficient(f"matrix is not full column rank (pivot {pivot:.3e} at column {col})")
        if pivot_row != col:
            M[[col, pivot_row]] = M[[pivot_row, col]]
        M[col + 1:] -= np.outer(M[col + 1:, col] / M[col, col], M[col])

    x = np.zeros(n)
    for row in range(n - 1, -1, -1):
        x[row] = (M[row, n] - M[row, row + 1:n] @ x[row + 1:]) / M[row, row]
    return x


def least_squares(A, b: Sequence[float]) -> np.ndarray:
    """x_LS = (A^T A)^-1 A^T b for full-column-rank A"""
    A = _matrix(A)
    b = np.asarray(b, dtype=float).reshape(-1)
    if A.shape[0] != b.size:
        raise LengthMismatch(f"A has {A.shape[0]} rows, b has {b.size} entries")
    if A.shape[0] < A.shape[1]:
        raise RankDeficient(f"{A.shape[0]}x{A.shape[1]} matrix cannot have full column rank")
    return _solve_normal_equations(A.T @ A, A.T @ b)


def spectral_norm(A) -> float:
    """
    Largest singular value via power iteration on A^T A

    Each step applies the current power of the Gram matrix and then squares
    it, so step k has advanced the start vector by 2^(k+1) - 1 plain power
    steps. Stops once the eigen-residual |G v - lambda v| is at most
    POWER_TOLERANCE * lambda.
    """
    A = _matrix(A)
    gram = A.T @ A
    if not np.any(gram):
        return 0.0

    v = np.random.default_rng(POWER_SEED).standard_normal(gram.shape[0])
    v /= np.linalg.norm(v)
    power = gram / np.abs(gram).max()

    for _ in range(POWER_MAX_ITER):
        rayleigh = float(v @ gram @ v)
        residual = float(np.linalg.norm(gram @ v - rayleigh * v))
        if residual <= POWER_TOLERANCE * rayleigh:
            return math.sqrt(max(rayleigh, 0.0))

        w = power @ v
        norm_w = float(np.linalg.norm(w))
        if norm_w == 0.0:
            # start vector orthogonal to the dominant subspace
            w = power[:, int(np.argmax(np.abs(power).sum(axis=0)))]
            norm_w = float(np.linalg.norm(w))
        v = w / norm_w

        power = power @ power
        power /= np.abs(power).max()

    raise NonConvergence(f"power iteration did not converge in {POWER_MAX_ITER} iterations")


def ama_left_operator(a_row: Sequence[float]) -> np.ndarray:
    """L with L[j] = 1 / (p * a[j]) on active entries, so that a . L == 1"""
    a = np.asarray(a_row, dtype=float).reshape(-1)
    if not np.any(a):
        raise DegenerateInstance("coefficient row is all zeros")
    L, _ = equal_shares(a, 1.0)
    return L


def row_pseudoinverse(a_row: Sequence[float]) -> np.ndarray:
    """A+ of a 1 x n row: a^T / (a a^T)"""
    a = np.asarray(a_row, dtype=float).reshape(-1)
    norm_sq = float(a @ a)
    if norm_sq == 0.0:
        raise DegenerateInstance("coefficient row is all zeros")
    return a / norm_sq


def residual_bound_check(A, b: Sequence[float], x_cand: Sequence[float]) -> BoundReport:
    """||A x - b|| <= ||A|| ||x - x_LS|| + ||A x_LS - b||"""
    A = _matrix(A)
    b = np.asarray(b, dtype=float).reshape(-1)
    x_cand = np.asarray(x_cand, dtype=float).reshape(-1)
    if x_cand.size != A.shape[1]:
        raise LengthMismatch(f"candidate has {x_cand.size} entries, A has {A.shape[1]} columns")

    x_ls = least_squares(A, b)
    lhs = float(np.linalg.norm(A @ x_cand - b))
    rhs = spectral_norm(A) * float(np.linalg.norm(x_cand - x_ls)) + float(np.linalg.norm(A @ x_ls - b))
    return BoundReport.compare(lhs, rhs)


def deviation_bound_check(a_row: Sequence[float], b: float) -> BoundReport:
    """||x_AMA - A+ b|| <= ||L_AMA - A+|| |b| for one equation"""
    L = ama_left_operator(a_row)
    pinv = row_pseudoinverse(a_row)
    x_ama = solve_row(a_row, b)
    lhs = float(np.linalg.norm(x_ama - pinv * b))
    rhs = float(np.linalg.norm(L - pinv)) * abs(float(b))
    return BoundReport.compare(lhs, rhs)


def existence_check(a_row: Sequence[float], b: float) -> ExistenceReport:
    """
    Existence of the AMA solution for one equation

    a . L == 1 makes x_AMA = L b solve the equation; AMA equals the
    minimum-norm (pseudoinverse) solution exactly when L == A+.
    """
    a = np.asarray(a_row, dtype=float).reshape(-1)
    L = ama_left_operator(a)
    pinv = row_pseudoinverse(a)
    x_ama = L * float(b)

    left_identity_error = abs(float(a @ L) - 1.0)
    residual = abs(float(a @ x_ama) - float(b))
    operator_gap = float(np.linalg.norm(L - pinv))

    return ExistenceReport(
        left_identity_error=left_identity_error,
        residual=residual,
        operator_gap=operator_gap,
        solves_system=residual <= 1e-9 * max(1.0, abs(float(b))),
        coincides_with_pseudoinverse=operator_gap <= 1e-12 * max(1.0, float(np.linalg.norm(pinv))),
    )


def ama_rowwise(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Apply the arithmetic method to every equation A[r] . x = b[r]; rows stacked"""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float).reshape(-1)
    if A.shape[0] != b.size:
        raise LengthMismatch(f"A has {A.shape[0]} rows, b has {b.size} entries")
    solutions = np.empty_like(A)
    for r in range(A.shape[0]):
        try:
            solutions[r], _ = equal_shares(A[r], float(b[r]))
        except DegenerateInstance as error:
            raise DegenerateInstance(error.message, row_index=r)
    return solutions


def stability_constant(A, b: Sequence[float]) -> float:
    """
    Lipschitz constant of the row-wise AMA map under support-preserving perturbations

    Valid when eta_A <= min_active |a_rj| / 2, so no active coefficient can
    change sign or vanish.
    """
    A = _matrix(A)
    b = np.asarray(b, dtype=float).reshape(-1)
    m, n = A.shape
    worst = 0.0
    for r in range(m):
        active = A[r] != 0.0
        p = int(np.count_nonzero(active))
        if p == 0:
            raise DegenerateInstance("coefficient row is all zeros", row_index=r)
        operator_norm = float(np.linalg.norm(ama_left_operator(A[r])))
        derivative = abs(float(b[r])) / (p * float(np.min(A[r][active] ** 2)))
        worst = max(worst, operator_norm, derivative)
    return 2.0 * math.sqrt(2.0) * math.sqrt(min(m, n)) * worst


def stability_probe(
    A,
    b: Sequence[float],
    eta_A: float,
    eta_b: float,
    trials: int,
    seed: int,
) -> float:
    """
    Largest observed ||x(A+dA, b+db) - x(A, b)|| / (eta_A + eta_b)

    Perturbations live on the support of A (zero coefficients stay inactive)
    and are scaled to ||dA||_2 <= eta_A, ||db||_2 <= eta_b.
    """

    if eta_A < 0 or eta_b < 0:
        raise InvalidParameter("perturbation sizes must be nonnegative")
    if eta_A + eta_b <= 0:
        raise InvalidParameter("eta_A + eta_b must be positive")
    if trials < 1:
        raise InvalidParameter("trials must be >= 1")

    A = _matrix(A)
    b = np.asarray(b, dtype=float).reshape(-1)
    support = A != 0.0
    base = ama_rowwise(A, b)
    rng = np.random.default_rng(seed)
    worst = 0.0

    for _ in range(trials):
        dA = np.zeros_like(A)
        if eta_A > 0:
            direction = np.where(support, rng.standard_normal(A.shape), 0.0)
            size = float(np.linalg.norm(direction, 2))
            if size > 0:
                dA = direction * (eta_A * rng.uniform(0.0, 1.0) / size)

        db = np.zeros_like(b)
        if eta_b > 0:
            direction = rng.standard_normal(b.shape)
            db = direction * (eta_b * rng.uniform(0.0, 1.0) / float(np.linalg.norm(direction)))

        perturbed = ama_rowwise(A + dA, b + db)
        worst = max(worst, float(np.linalg.norm(perturbed - base)) / (eta_A + eta_b))

    if not math.isfinite(worst):
        raise NonConvergence("stability ratio overflowed")
    return worst


def _blend_vectors(y, u, v) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    y = np.asarray(y, dtype=float).reshape(-1)
    u = np.asarray(u, dtype=float).reshape(-1)
    v = np.asarray(v, dtype=float).reshape(-1)
    if not (y.size == u.size == v.size):
        raise LengthMismatch(f"lengths differ: y={y.size}, u={u.size}, v={v.size}")
    if y.size == 0:
        raise LengthMismatch("vectors must not be empty")
    return y, u, v


def optimal_alpha(y, u, v) -> float:
    """alpha_hat = sum((y - v)(u - v)) / sum((u - v)^2)"""
    y, u, v = _blend_vectors(y, u, v)
    gap = u - v
    denominator = float(gap @ gap)
    if denominator == 0.0:
        raise IdenticalPredictors("the two predictors agree everywhere; any blend is equivalent")
    return float((y - v) @ gap) / denominator


def empirical_risk(y, u, v, alpha: float) -> float:
    """mean((alpha u + (1 - alpha) v - y)^2)"""
    y, u, v = _blend_vectors(y, u, v)
    residual = alpha * u + (1.0 - alpha) * v - y
    return float(np.mean(residual * residual))
