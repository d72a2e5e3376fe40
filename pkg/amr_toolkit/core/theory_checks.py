"""
Randomized property suites for the linear-algebra results

Handles:
- Residual bound on random least-squares instances
- Deviation bound and the AMA/pseudoinverse coincidence rule
- The left-identity a . L == 1 and exact solution of each equation
- Stability ratio against the estimated Lipschitz constant
- Dominance of the closed-form blend coefficient over a 101-point grid
- Least squares against an SVD pseudoinverse, spectral norm against its transpose

Each suite draws from its own generator, seeded from the root seed and the
suite name, so suites can be added or reordered without changing the others.
"""

import logging
from typing import Callable, Dict, List, Tuple

import numpy as np

from .exceptions import InvalidParameter
from .linalg_theory import (
    deviation_bound_check,
    empirical_risk,
    existence_check,
    least_squares,
    optimal_alpha,
    residual_bound_check,
    spectral_norm,
    stability_constant,
    stability_probe,
)
from ..models.regression_models import SuiteSummary, TheoryCheckReport
from ..utils.seeding import generator_for


logger = logging.getLogger(__name__)

MAX_CONDITION = 1e3
ALPHA_GRID_POINTS = 101
RISK_TOLERANCE = 1e-12
ORACLE_TOLERANCE = 1e-8
PROBE_TRIALS = 20
MAX_VIOLATIONS_KEPT = 20

Instance = Dict[str, object]
TrialOutcome = Tuple[bool, Instance]


def _signed_magnitudes(rng: np.random.Generator, size, low: float, high: float) -> np.ndarray:
    return rng.uniform(low, high, size=size) * rng.choice([-1.0, 1.0], size=size)


def _full_rank_matrix(rng: np.random.Generator, m: int, n: int) -> np.ndarray:
    # redraw until comfortably full column rank
    while True:
        A = rng.standard_normal((m, n))
        if np.linalg.cond(A) <= MAX_CONDITION:
            return A


class TheoryChecker:
    """
    Runs every randomized suite and collects a TheoryCheckReport

    Features:
    - One derived generator per suite
    - Pass counts plus the offending instances of any violation
    - trials sets the instance count per suite (the blend suite uses twice as many)
    """

    def __init__(self, seed: int, trials: int = 100):
        if trials < 1:
            raise InvalidParameter("trials must be >= 1")
        self.seed = seed
        self.trials = trials

        self.suites: List[Tuple[str, int, Callable[[np.random.Generator], TrialOutcome]]] = [
            ("residual_bound", trials, self._residual_trial),
            ("deviation_bound", trials, self._deviation_trial),
            ("left_identity", trials, self._left_identity_trial),
            ("stability", trials, self._stability_trial),
            ("alpha_dominance", 2 * trials, self._alpha_trial),
            ("least_squares_oracle", trials, self._least_squares_trial),
            ("spectral_symmetry", trials, self._spectral_trial),
        ]

    # Trials

    def _residual_trial(self, rng: np.random.Generator) -> TrialOutcome:
        m = int(rng.integers(2, 9))
        n = int(rng.integers(1, m + 1))
        A = _full_rank_matrix(rng, m, n)
        b = rng.standard_normal(m)
        scale = 10.0 ** rng.uniform(-3.0, 1.0)
        x_cand = least_squares(A, b) + scale * rng.standard_normal(n)

        report = residual_bound_check(A, b, x_cand)
        return report.holds, {"A": A.tolist(), "b": b.tolist(), "x_cand": x_cand.tolist(),
                              "lhs": report.lhs, "rhs": report.rhs}

    def _deviation_trial(self, rng: np.random.Generator) -> TrialOutcome:
        n = int(rng.integers(1, 7))
        equal = bool(rng.uniform() < 0.25)
        if equal:
            a = float(rng.uniform(0.1, 10.0)) * rng.choice([-1.0, 1.0], size=n)
        else:
            a = _signed_magnitudes(rng, n, 0.1, 10.0)
        b = float(rng.uniform(-100.0, 100.0))

        report = deviation_bound_check(a, b)
        equal_magnitudes = bool(np.all(np.abs(a) == np.abs(a[0])))
        coincides = existence_check(a, b).coincides_with_pseudoinverse
        return report.holds and coincides == equal_magnitudes, {
            "a": a.tolist(), "b": b, "lhs": report.lhs, "rhs": report.rhs,
            "equal_magnitudes": equal_magnitudes, "coincides": coincides,
        }

    def _left_identity_trial(self, rng: np.random.Generator) -> TrialOutcome:
        n = int(rng.integers(1, 9))
        a = _signed_magnitudes(rng, n, 0.01, 100.0)
        a[rng.uniform(size=n) < 0.2] = 0.0
        if not np.any(a):
            a[0] = 1.0
        b = float(rng.uniform(-1000.0, 1000.0))

        report = existence_check(a, b)
        ok = report.left_identity_error <= 1e-12 and report.solves_system
        return ok, {"a": a.tolist(), "b": b, "left_identity_error": report.left_identity_error,
                    "residual": report.residual}

    def _stability_trial(self, rng: np.random.Generator) -> TrialOutcome:
        m = int(rng.integers(1, 5))
        n = int(rng.integers(1, 5))
        A = _signed_magnitudes(rng, (m, n), 0.5, 5.0)
        A[rng.uniform(size=(m, n)) < 0.2] = 0.0
        for r in range(m):
            if not np.any(A[r]):
                A[r, int(rng.integers(0, n))] = 1.0
        b = rng.uniform(-10.0, 10.0, size=m)

        smallest = float(np.min(np.abs(A[A != 0.0])))
        eta_A = 0.5 * smallest * float(rng.uniform(0.0, 1.0))
        eta_b = float(rng.uniform(0.0, 1.0))
        if eta_A + eta_b == 0.0:
            eta_b = 0.5

        ratio = stability_probe(A, b, eta_A, eta_b, trials=PROBE_TRIALS, seed=int(rng.integers(0, 2**31)))
        constant = stability_constant(A, b)
        return ratio <= constant * (1.0 + 1e-9), {
            "A": A.tolist(), "b": b.tolist(), "eta_A": eta_A, "eta_b": eta_b,
            "ratio": ratio, "constant": constant,
        }

    def _alpha_trial(self, rng: np.random.Generator) -> TrialOutcome:
        size = int(rng.integers(1, 21))
        y, u, v = (rng.uniform(-5.0, 5.0, size=size) for _ in range(3))

        alpha_hat = optimal_alpha(y, u, v)
        best = empirical_risk(y, u, v, alpha_hat)
        grid = np.linspace(0.0, 1.0, ALPHA_GRID_POINTS)
        grid_min = min(empirical_risk(y, u, v, float(alpha)) for alpha in grid)
        return best <= grid_min + RISK_TOLERANCE, {
            "y": y.tolist(), "u": u.tolist(), "v": v.tolist(),
            "alpha_hat": alpha_hat, "risk_at_alpha_hat": best, "grid_min": grid_min,
        }

    def _least_squares_trial(self, rng: np.random.Generator) -> TrialOutcome:
        m = int(rng.integers(2, 9))
        n = int(rng.integers(1, m + 1))
        A = _full_rank_matrix(rng, m, n)
        b = rng.standard_normal(m)

        ours = least_squares(A, b)
        oracle = np.linalg.pinv(A) @ b
        error = float(np.linalg.norm(ours - oracle))
        return error <= ORACLE_TOLERANCE * max(1.0, float(np.linalg.norm(oracle))), {
            "A": A.tolist(), "b": b.tolist(), "error": error,
        }

    def _spectral_trial(self, rng: np.random.Generator) -> TrialOutcome:
        m = int(rng.integers(1, 9))
        n = int(rng.integers(1, 9))
        A = rng.standard_normal((m, n))

        forward = spectral_norm(A)
        backward = spectral_norm(A.T)
        reference = float(np.linalg.norm(A, 2))
        scale = max(reference, 1e-300)
        ok = abs(forward - backward) <= ORACLE_TOLERANCE * scale and abs(forward - reference) <= ORACLE_TOLERANCE * scale
        return ok, {"A": A.tolist(), "norm": forward, "transpose_norm": backward, "svd_norm": reference}

    # Driver

    def run_suite(self, name: str, count: int, trial: Callable[[np.random.Generator], TrialOutcome]) -> SuiteSummary:
        rng = generator_for(self.seed, f"theory-check:{name}")
        passed = 0
        violations: List[Instance] = []

        for index in range(count):
            ok, instance = trial(rng)
            if ok:
                passed += 1
            elif len(violations) < MAX_VIOLATIONS_KEPT:
                violations.append({"trial": index, **instance})

        if passed < count:
            logger.error(f"{name}: {count - passed} of {count} instances violate the property")
        else:
            logger.info(f"{name}: {passed}/{count} hold")
        return SuiteSummary(name=name, trials=count, passed=passed, violations=violations)

    def run(self) -> TheoryCheckReport:
        summaries = [self.run_suite(name, count, trial) for name, count, trial in self.suites]
        return TheoryCheckReport(
            seed=self.seed,
            trials=self.trials,
            suites=summaries,
            all_hold=all(summary.ok for summary in summaries),
        )


def run_theory_checks(seed: int, trials: int = 100) -> TheoryCheckReport:
    return TheoryChecker(seed, trials).run()
