import pytest

from amr_toolkit.core.exceptions import InvalidParameter
from amr_toolkit.core.theory_checks import TheoryChecker, run_theory_checks
from amr_toolkit.utils.config import DEFAULT_SEED


SUITES = {
    "residual_bound",
    "deviation_bound",
    "left_identity",
    "stability",
    "alpha_dominance",
    "least_squares_oracle",
    "spectral_symmetry",
}


class TestTheoryChecker:
    def test_every_property_holds_at_default_seed(self):
        report = run_theory_checks(DEFAULT_SEED, trials=100)
        assert report.all_hold, [s.violations[:1] for s in report.suites if not s.ok]
        assert {s.name for s in report.suites} == SUITES

    def test_trial_counts(self):
        report = run_theory_checks(3, trials=5)
        counts = {s.name: s.trials for s in report.suites}
        assert counts["alpha_dominance"] == 10
        assert counts["residual_bound"] == 5
        assert report.trials == 5

    @pytest.mark.parametrize("seed", [1, 2, 99])
    def test_other_seeds(self, seed):
        assert run_theory_checks(seed, trials=25).all_hold

    def test_deterministic(self):
        assert run_theory_checks(11, trials=10) == run_theory_checks(11, trials=10)

    def test_suites_do_not_share_streams(self):
        # a suite's draws depend only on (seed, suite name)
        checker = TheoryChecker(5, trials=4)
        name, count, trial = checker.suites[0]
        alone = checker.run_suite(name, count, trial)
        assert checker.run().suites[0] == alone

    def test_trials_must_be_positive(self):
        with pytest.raises(InvalidParameter):
            TheoryChecker(1, trials=0)
