import numpy as np
import pytest

from amr_toolkit.core.arithmetic_method import (
    ArithmeticMethodValidator,
    ama_validate,
    equal_shares,
    fit_instance,
    percentage_error,
    reconstruct,
    reconstruct_rows,
    solve_row,
)
from amr_toolkit.core.exceptions import DegenerateInstance, EmptyVector, InvalidParameter, LengthMismatch


class TestSolveRow:
    def test_equal_coefficients(self):
        x = solve_row([1, 1, 1, 1], 4)
        np.testing.assert_array_equal(x, [1, 1, 1, 1])
        assert reconstruct([1, 1, 1, 1], x) == 4

    def test_zero_target_gives_zero_shares(self):
        np.testing.assert_array_equal(solve_row([5, -2], 0), [0, 0])

    def test_single_equation(self):
        np.testing.assert_array_equal(solve_row([2], 6), [3])

    def test_inactive_coefficients_get_no_share(self):
        x = solve_row([4, 0, -2], 6)
        assert x[1] == 0.0
        assert 4 * x[0] == pytest.approx(3.0)
        assert -2 * x[2] == pytest.approx(3.0)

    def test_empty_vector(self):
        with pytest.raises(EmptyVector):
            solve_row([], 1.0)

    def test_all_zero_with_nonzero_target(self):
        with pytest.raises(DegenerateInstance):
            solve_row([0, 0, 0], 1.0)

    def test_all_zero_with_zero_target(self):
        np.testing.assert_array_equal(solve_row([0, 0], 0.0), [0, 0])

    def test_non_finite_rejected(self):
        with pytest.raises(InvalidParameter):
            solve_row([1.0, np.inf], 1.0)

    def test_share_equality(self, rng):
        for _ in range(100):
            a = rng.uniform(-10, 10, size=rng.integers(1, 30))
            y = float(rng.uniform(-100, 100))
            x = solve_row(a, y)
            np.testing.assert_allclose(a * x, y / a.size, rtol=1e-12)


class TestReconstruct:
    def test_dot_product(self):
        assert reconstruct([1, 2, 3], [4, 5, 6]) == 32.0

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            reconstruct([1, 2], [1])

    def test_rows_match_single_reconstruction(self, rng):
        A = rng.normal(size=(6, 5))
        x = rng.normal(size=5)
        rows = reconstruct_rows(A, x)
        for q in range(6):
            assert rows[q] == reconstruct(A[q], x)


class TestFitInstance:
    def test_two_regressors(self):
        fit = fit_instance([2, 4], 8)
        np.testing.assert_array_equal(fit.a, [2, 1])
        assert fit.y_hat == 8
        assert fit.p == 2

    def test_one_active_regressor(self):
        fit = fit_instance([3, 0], 6)
        np.testing.assert_array_equal(fit.a, [2, 0])
        assert fit.y_hat == 6
        assert fit.p == 1

    def test_zero_regressand(self):
        fit = fit_instance([1, 1], 0)
        np.testing.assert_array_equal(fit.a, [0, 0])
        assert fit.y_hat == 0

    def test_exact_reconstruction_round_trips(self, rng):
        for _ in range(1000):
            x = rng.uniform(-1000, 1000, size=rng.integers(1, 50))
            y = float(rng.uniform(-1000, 1000))
            a = fit_instance(x, y).a
            assert abs(reconstruct(a, x) - y) <= 1e-9 * max(1.0, abs(y))

    def test_scale_covariance(self, rng):
        for _ in range(50):
            x = rng.uniform(0.5, 10, size=4)
            y = float(rng.uniform(-10, 10))
            c = float(rng.choice([-3.0, 0.25, 7.0]))
            np.testing.assert_allclose(fit_instance(c * x, y).a, fit_instance(x, y).a / c, rtol=1e-14)


class TestLiteralIndexDivisor:
    def test_reconstruction_grows_harmonically(self):
        shares, p = equal_shares(np.array([1.0, 1.0, 1.0]), 6.0, literal_index_divisor=True)
        assert p == 3
        assert reconstruct([1, 1, 1], shares) == pytest.approx(6.0 * (1 + 1 / 2 + 1 / 3))

    def test_single_dimension_unchanged(self):
        assert solve_row([4.0], 8.0, literal_index_divisor=True)[0] == 2.0


class TestPercentageError:
    def test_values(self):
        assert percentage_error(4.0, 5.0) == 25.0
        assert percentage_error(0.0, 0.0) == 0.0
        assert percentage_error(0.0, 1.0) == float("inf")


class TestValidation:
    def test_single_dimension_is_exact_to_rounding(self):
        records = list(ama_validate(checkpoints=[1], seed=3))
        assert records[0].i == 1
        assert records[0].eps <= 1e-13

    def test_million_dimensions(self):
        (record,) = ama_validate(checkpoints=[1_000_000], seed=20240101)
        assert record.i == 1_000_000
        assert record.eps <= 1e-8
        assert record.t >= 0.0

    def test_error_grows_with_dimension(self):
        validator = ArithmeticMethodValidator()

        def mean_eps(i):
            return float(np.mean([validator.run_checkpoint(i, seed).eps for seed in range(20)]))

        assert mean_eps(1_000_000) >= mean_eps(10)

    def test_checkpoints_sorted_and_deduplicated(self):
        records = list(ama_validate(checkpoints=[100, 1, 10, 10], seed=1))
        assert [r.i for r in records] == [1, 10, 100]

    def test_full_sweep(self):
        records = list(ama_validate(m_max=5, seed=1))
        assert [r.i for r in records] == [1, 2, 3, 4, 5]

    def test_deterministic_apart_from_timing(self):
        first = [(r.i, r.y, r.y_hat, r.eps) for r in ama_validate(checkpoints=[1, 10, 1000], seed=9)]
        second = [(r.i, r.y, r.y_hat, r.eps) for r in ama_validate(checkpoints=[1, 10, 1000], seed=9)]
        assert first == second

    def test_records_independent_of_other_checkpoints_and_workers(self):
        alone = list(ama_validate(checkpoints=[1000], seed=5))[0]
        together = list(ama_validate(checkpoints=[1, 10, 1000], seed=5, workers=3))[-1]
        assert (alone.y, alone.y_hat) == (together.y, together.y_hat)

    def test_targets_avoid_zero_neighbourhood(self):
        for record in ama_validate(m_max=200, seed=11):
            assert abs(record.y) >= 1e-3

    def test_literal_divisor_shows_harmonic_error(self):
        (record,) = ama_validate(checkpoints=[10], seed=2, literal_index_divisor=True)
        harmonic = sum(1.0 / j for j in range(1, 11))
        assert record.eps == pytest.approx((harmonic - 1.0) * 100.0, rel=1e-9)

    def test_m_max_required_without_checkpoints(self):
        with pytest.raises(InvalidParameter):
            list(ama_validate(seed=1))

    def test_bad_value_range(self):
        with pytest.raises(InvalidParameter):
            ArithmeticMethodValidator(value_range=(5.0, 5.0))
        with pytest.raises(InvalidParameter):
            ArithmeticMethodValidator(value_range=(-1e-4, 1e-4))

    def test_csv_row_matches_header(self):
        (record,) = ama_validate(checkpoints=[3], seed=4)
        row = record.csv_row()
        assert len(row) == len(record.CSV_HEADER)
        assert float(row[1]) == record.y
