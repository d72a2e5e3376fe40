import numpy as np
import pytest

from amr_toolkit.core.evaluation import build_metric_set
from amr_toolkit.core.exceptions import MissingPredictions, ParseError, RowCountMismatch
from amr_toolkit.core.reporting import (
    PREDICTION_COLUMNS,
    DatasetResults,
    ReportBuilder,
    collect_results,
    compare_algorithms,
    load_published_table,
    metrics_path,
    natural_key,
    pair_seed,
    predictions_path,
    read_predictions,
    verdict_line,
)
from amr_toolkit.models.regression_models import Decision, EtPreference
from amr_toolkit.utils.file_io import format_float, write_csv, write_json

from .helpers import DATASETS_DIR


ACTUAL = [0.0, 1.0, 2.0, 3.0]


def write_algorithm(directory, algorithm, actual, predicted, et=0.0, details=None, with_metrics=True):
    if with_metrics:
        metrics = build_metric_set(actual, predicted, et, algorithm, directory.name, details=details)
        write_json(metrics_path(directory, algorithm), metrics)
    rows = [[str(i), format_float(a), format_float(p)] for i, (a, p) in enumerate(zip(actual, predicted))]
    write_csv(predictions_path(directory, algorithm), PREDICTION_COLUMNS, rows)


@pytest.fixture
def results_dir(tmp_path):
    """Data-1: amr errors 0.25, knn errors 1.0; Data-2: knn better"""
    root = tmp_path / "results"
    first = root / "Data-1"
    write_algorithm(first, "amr", ACTUAL, [a + 0.25 for a in ACTUAL], et=2.0)
    write_algorithm(first, "knn", ACTUAL, [a + 1.0 for a in ACTUAL], et=1.0)
    write_algorithm(first, "svr", ACTUAL, [a - 0.5 for a in ACTUAL], details={"external": True})
    second = root / "Data-2"
    write_algorithm(second, "amr", ACTUAL, [a + 1.0 for a in ACTUAL], et=1.0)
    write_algorithm(second, "knn", ACTUAL, [a + 0.5 for a in ACTUAL], et=1.0)
    return root


class TestLayout:
    def test_natural_order(self):
        assert sorted(["Data-10", "Data-2", "Data-1"], key=natural_key) == ["Data-1", "Data-2", "Data-10"]

    def test_pair_seed_ignores_side(self):
        assert pair_seed(7, "amr", "knn") == pair_seed(7, "knn", "amr")
        assert pair_seed(7, "amr", "knn") != pair_seed(7, "amr", "lr")

    def test_collect_skips_directories_without_metrics(self, results_dir):
        (results_dir / "empty").mkdir()
        (results_dir / "Data-10").mkdir()
        write_algorithm(results_dir / "Data-10", "amr", ACTUAL, ACTUAL)
        assert [r.name for r in collect_results(results_dir)] == ["Data-1", "Data-2", "Data-10"]


class TestReadPredictions:
    def test_row_order_restored(self, write_file):
        path = write_file("p.csv", "row_index,actual,prediction\n1,2,3\n0,4,5\n")
        actual, predicted = read_predictions(path)
        np.testing.assert_array_equal(actual, [4, 2])
        np.testing.assert_array_equal(predicted, [5, 3])

    def test_gap_in_indices(self, write_file):
        with pytest.raises(MissingPredictions):
            read_predictions(write_file("p.csv", "row_index,actual,prediction\n0,1,1\n2,1,1\n"))

    def test_bad_header(self, write_file):
        with pytest.raises(ParseError):
            read_predictions(write_file("p.csv", "i,y,yhat\n0,1,1\n"))

    def test_missing_file(self, tmp_path):
        with pytest.raises(MissingPredictions):
            read_predictions(tmp_path / "none.csv")


class TestCompare:
    def test_self_pair(self, results_dir):
        results = DatasetResults.from_directory(results_dir / "Data-1")
        report = compare_algorithms(results, "amr", "amr", n_perm=100, root_seed=1)
        assert report.perm.dif_obs == 0.0
        assert report.perm.p_value == 1.0
        assert report.verdict.decision == Decision.SIMILAR

    def test_exhaustive_pair(self, results_dir):
        results = DatasetResults.from_directory(results_dir / "Data-1")
        report = compare_algorithms(results, "amr", "knn", n_perm=100, root_seed=1)
        assert report.perm.dif_obs == -0.75
        assert report.perm.p_value == 0.125
        assert report.verdict.decision == Decision.SIMILAR
        assert report.verdict.et_preference == EtPreference.B
        assert "lower ET: knn" in verdict_line(report)

    def test_row_count_mismatch(self, tmp_path):
        directory = tmp_path / "Data-3"
        write_algorithm(directory, "a", ACTUAL, ACTUAL)
        write_algorithm(directory, "b", ACTUAL[:3], ACTUAL[:3])
        with pytest.raises(RowCountMismatch):
            compare_algorithms(DatasetResults.from_directory(directory), "a", "b", 100, 1)

    def test_metrics_rebuilt_from_predictions(self, tmp_path):
        directory = tmp_path / "Data-4"
        write_algorithm(directory, "a", ACTUAL, [a + 0.5 for a in ACTUAL], with_metrics=False)
        results = DatasetResults.from_directory(directory)
        assert "a" not in results.metrics
        metrics = results.load_metrics("a")
        assert metrics.mae == 0.5
        assert metrics.et == 0.0


class TestReportBuilder:
    @pytest.fixture
    def builder(self, results_dir):
        return ReportBuilder(collect_results(results_dir), reference="amr", n_perm=100, seed=1)

    def test_algorithm_order(self, builder):
        assert builder.algorithms == ["amr", "knn", "svr"]

    def test_mae_table(self, builder):
        header, rows = builder.metric_table("mae")
        assert header == ["dataset", "amr", "knn", "svr", "best"]
        assert rows[0] == ["Data-1", "0.2500", "1.0000", "0.5000", "amr"]
        assert rows[1] == ["Data-2", "1.0000", "0.5000", "", "knn"]

    def test_r2_prefers_higher(self, builder):
        _, rows = builder.metric_table("r2")
        assert rows[0][-1] == "amr"

    def test_et_blank_for_imported_predictions(self, builder):
        _, rows = builder.metric_table("et")
        assert rows[0] == ["Data-1", "2.0000", "1.0000", "", "knn"]
        assert rows[1][-1] == "amr;knn"

    def test_pairwise_table(self, builder):
        header, rows = builder.pairwise_table()
        assert header[:4] == ["dataset", "amr_vs_knn_dif_obs", "amr_vs_knn_p_value", "amr_vs_knn_verdict"]
        assert rows[0][1:4] == ["-0.7500", "0.1250", "similar"]
        # Data-2 has no svr predictions
        assert rows[1][4:] == ["", "", ""]

    def test_error_profile_marks_reference(self, builder):
        header, rows = builder.error_profile_table()
        assert header[:5] == ["dataset", "algorithm", "MAE_mean", "MAE_SD", "MAE_p"]
        amr_row = next(r for r in rows if r[:2] == ["Data-1", "amr"])
        knn_row = next(r for r in rows if r[:2] == ["Data-1", "knn"])
        assert amr_row[4] == "-"
        assert knn_row[4] == "0.1250"
        assert amr_row[2] == "0.2500"
        assert amr_row[3] == "0.0000"

    def test_deviation_table(self, builder):
        header, rows = builder.deviation_table({("Data-1", "amr"): 0.5})
        assert header[-1] == "rel_diff"
        assert rows[0] == ["Data-1", "amr", "0.2500", "0.5000", "0.2500", "0.5000"]
        assert rows[1] == ["Data-1", "knn", "1.0000", "", "", ""]

    def test_headline(self, builder):
        headline = builder.headline("knn")
        assert headline["datasets_compared"] == 2
        assert headline["reference_not_worse"] == 1
        assert headline["majority"] is False
        assert headline["datasets_not_worse"] == ["Data-1"]

    def test_headline_with_published_values(self, builder):
        published = {("D-1", "amr"): 0.5, ("D-1", "knn"): 0.6, ("D-2", "amr"): 0.7, ("D-2", "knn"): 0.6}
        headline = builder.headline("knn", published)
        assert headline["published_not_worse"] == 1
        assert headline["published_datasets"] == 2


class TestPublishedTable:
    def test_bundled_table(self):
        table = load_published_table(DATASETS_DIR / "published_mae.csv")
        assert table[("Data-1", "amr")] == 0.5396
        assert table[("Data-1", "knn")] == 0.6976

    def test_bad_columns(self, write_file):
        with pytest.raises(ParseError):
            load_published_table(write_file("p.csv", "name,value\nx,1\n"))
