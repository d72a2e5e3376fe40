"""End-to-end runs of the command-line entry point"""

import csv
import json

import pytest

from amr_toolkit.main import main
from amr_toolkit.models.regression_models import ComparisonReport, Decision, MetricSet


TOY_CSV = (
    "a,b,y\n"
    "1,2,3.5\n2,1,4.1\n3,3,7.2\n4,1,6.8\n1,4,6.0\n"
    "2,2,5.1\n5,2,9.3\n3,1,5.2\n4,4,10.4\n2,5,8.1\n"
)
SMALL_GRIDS = ["--alpha-grid", "0.5,1.0", "--delta-grid", "1.0,2.0"]


def read_rows(path):
    with open(path, newline="", encoding="utf-8") as handle:
        return list(csv.reader(handle))


@pytest.fixture
def toy_csv(write_file):
    return write_file("toy.csv", TOY_CSV)


@pytest.fixture
def evaluated(toy_csv, tmp_path):
    """Results directory after evaluating amr, knn and lr on the toy dataset"""
    out = tmp_path / "results"
    status = main(["evaluate", "--datasets", str(toy_csv), "--algorithms", "amr,knn,lr",
                   *SMALL_GRIDS, "--out", str(out), "--log-level", "WARNING"])
    assert status == 0
    return out


class TestParser:
    def test_version(self):
        assert main(["--version"]) == 0

    def test_command_required(self):
        assert main([]) == 2

    def test_unknown_flag(self):
        assert main(["theory-check", "--bogus"]) == 2


class TestAmaValidate:
    def test_checkpoints(self, tmp_path):
        assert main(["ama-validate", "--checkpoints", "100,1,10", "--out", str(tmp_path)]) == 0
        rows = read_rows(tmp_path / "ama_validation.csv")
        assert rows[0] == ["i", "y", "y_hat", "t_seconds", "eps_percent"]
        assert [row[0] for row in rows[1:]] == ["1", "10", "100"]

    def test_deterministic_under_seed(self, tmp_path):
        for name in ("first.csv", "second.csv"):
            args = ["ama-validate", "--checkpoints", "1,10,100", "--seed", "4",
                    "--output-file", str(tmp_path / name)]
            assert main(args) == 0
        first = [row[:3] + row[4:] for row in read_rows(tmp_path / "first.csv")]
        second = [row[:3] + row[4:] for row in read_rows(tmp_path / "second.csv")]
        assert first == second

    def test_empty_checkpoint_list(self, tmp_path):
        assert main(["ama-validate", "--checkpoints", "", "--out", str(tmp_path)]) == 2

    def test_sweep_and_list_are_exclusive(self, tmp_path):
        assert main(["ama-validate", "--checkpoints", "1", "--m-max", "3", "--out", str(tmp_path)]) == 2

    def test_m_max_sweep(self, tmp_path):
        assert main(["ama-validate", "--m-max", "4", "--out", str(tmp_path)]) == 0
        assert len(read_rows(tmp_path / "ama_validation.csv")) == 5


class TestEvaluate:
    def test_outputs(self, evaluated):
        directory = evaluated / "toy"
        for algorithm in ("amr", "knn", "lr"):
            metrics = MetricSet.model_validate_json((directory / f"metrics_{algorithm}.json").read_text())
            assert metrics.algorithm == algorithm
            assert metrics.n == 10
            rows = read_rows(directory / f"predictions_{algorithm}.csv")
            assert rows[0][:3] == ["row_index", "actual", "prediction"]
            assert len(rows) == 11
        assert (directory / "dataset.csv").is_file()
        assert (evaluated / "run_config.json").is_file()

    def test_amr_trace_columns(self, evaluated):
        header = read_rows(evaluated / "toy" / "predictions_amr.csv")[0]
        assert header[3:] == ["y_hat_ama", "y_hat_knn", "k", "dist_min"]

    def test_rerun_gives_identical_predictions(self, evaluated, toy_csv, tmp_path):
        rerun = tmp_path / "rerun"
        assert main(["evaluate", "--datasets", str(toy_csv), "--algorithms", "amr,knn,lr",
                     *SMALL_GRIDS, "--out", str(rerun)]) == 0
        for algorithm in ("amr", "knn", "lr"):
            name = f"predictions_{algorithm}.csv"
            assert (rerun / "toy" / name).read_text() == (evaluated / "toy" / name).read_text()

    def test_unknown_algorithm(self, toy_csv, tmp_path):
        assert main(["evaluate", "--datasets", str(toy_csv), "--algorithms", "amr,svm",
                     "--out", str(tmp_path)]) == 2

    def test_no_datasets(self, tmp_path):
        assert main(["evaluate", "--out", str(tmp_path)]) == 2

    def test_bad_grid(self, toy_csv, tmp_path):
        assert main(["evaluate", "--datasets", str(toy_csv), "--alpha-grid", "0:1",
                     "--out", str(tmp_path)]) == 2

    def test_external_predictions(self, toy_csv, write_file, tmp_path):
        lines = ["row_index,prediction"] + [f"{i},5.0" for i in range(10)]
        preds = write_file("toy_svr.csv", "\n".join(lines) + "\n")
        out = tmp_path / "with_external"
        template = str(preds.parent / "{dataset}_svr.csv")
        status = main(["evaluate", "--datasets", str(toy_csv), "--algorithms", "knn",
                       "--external", "svr=" + template, "--out", str(out)])
        assert status == 0
        metrics = MetricSet.model_validate_json((out / "toy" / "metrics_svr.json").read_text())
        assert metrics.details["external"] is True
        assert metrics.et == 0.0

    def test_failed_dataset_sets_exit_status(self, write_file, tmp_path):
        broken = write_file("broken.csv", "a,y\n1,2\n3\n")
        assert main(["evaluate", "--datasets", str(broken), "--algorithms", "knn",
                     "--out", str(tmp_path)]) == 1


class TestCompare:
    def test_self_pair(self, evaluated):
        directory = evaluated / "toy"
        assert main(["compare", "--pred-dir", str(directory), "--pair", "amr,amr"]) == 0
        report = ComparisonReport.model_validate_json((directory / "compare_amr_vs_amr.json").read_text())
        assert report.perm.dif_obs == 0.0
        assert report.perm.p_value == 1.0
        assert report.verdict.decision == Decision.SIMILAR

    def test_pair_is_deterministic(self, evaluated, tmp_path):
        paths = [tmp_path / "one.json", tmp_path / "two.json"]
        for path in paths:
            assert main(["compare", "--pred-dir", str(evaluated / "toy"), "--pair", "amr,knn",
                         "--seed", "3", "--output-file", str(path)]) == 0
        assert paths[0].read_text() == paths[1].read_text()

    def test_pair_needs_two_ids(self, evaluated):
        assert main(["compare", "--pred-dir", str(evaluated / "toy"), "--pair", "amr"]) == 2

    def test_missing_directory(self, tmp_path):
        assert main(["compare", "--pred-dir", str(tmp_path / "nowhere"), "--pair", "amr,knn"]) == 1

    def test_row_count_mismatch(self, write_file):
        write_file("mixed/predictions_a.csv", "row_index,actual,prediction\n0,1,1\n1,2,2\n")
        path = write_file("mixed/predictions_b.csv", "row_index,actual,prediction\n0,1,1\n")
        assert main(["compare", "--pred-dir", str(path.parent), "--pair", "a,b"]) == 1


class TestReport:
    def test_tables(self, evaluated):
        published = evaluated.parent / "published.csv"
        published.write_text("dataset,algorithm,mae\ntoy,amr,0.5\ntoy,knn,0.6\n", encoding="utf-8")
        assert main(["report", "--results", str(evaluated), "--published-table", str(published)]) == 0

        report_dir = evaluated / "report"
        for name in ("mae", "mse", "rmse", "r2", "et", "pairwise", "error_profile", "deviation_report"):
            assert (report_dir / f"{name}.csv").is_file()
        mae_rows = read_rows(report_dir / "mae.csv")
        assert mae_rows[0] == ["dataset", "amr", "knn", "lr", "best"]
        assert mae_rows[1][0] == "toy"

        headline = json.loads((report_dir / "headline.json").read_text())
        assert headline["datasets_compared"] == 1
        assert headline["published_not_worse"] == 1

    def test_empty_results(self, tmp_path):
        assert main(["report", "--results", str(tmp_path)]) == 1


class TestTheoryCheck:
    def test_bad_trial_count(self, tmp_path):
        assert main(["theory-check", "--trials", "0", "--out", str(tmp_path)]) == 2

    def test_seed_before_command(self, tmp_path):
        assert main(["--seed", "3", "theory-check", "--trials", "3", "--out", str(tmp_path)]) == 0
        report = json.loads((tmp_path / "theory_check.json").read_text())
        assert report["seed"] == 3
        assert report["all_hold"] is True

    def test_reproducible(self, tmp_path):
        paths = [tmp_path / "a.json", tmp_path / "b.json"]
        for path in paths:
            assert main(["theory-check", "--trials", "4", "--seed", "8", "--output-file", str(path)]) == 0
        assert paths[0].read_text() == paths[1].read_text()
