"""
Evaluation Controller - the `evaluate`, `compare` and `report` commands

Handles:
- LOOCV evaluation of AMR, the baselines and imported predictions per dataset
- MetricSet JSON, per-instance prediction CSVs and the preprocessed dataset on disk
- Pairwise permutation tests with the decision-rule verdict
- Aggregated tables, error profiles and the deviation report
"""

import argparse
import logging
from pathlib import Path
from typing import List

from .common import EXIT_FAILURE, EXIT_OK, command, settings_from
from ..core.data_ingest import Dataset, dataset_config_for, prepare_dataset, write_numeric_csv
from ..core.exceptions import AmrToolkitError, ConfigError, MissingPredictions, UsageError
from ..core.experiment import AlgorithmRun, ExperimentRunner
from ..core.reporting import (
    METRIC_TABLES,
    PREDICTION_COLUMNS,
    DatasetResults,
    ReportBuilder,
    collect_results,
    compare_algorithms,
    load_published_table,
    metrics_path,
    predictions_path,
    verdict_line,
)
from ..models.regression_models import RunConfig
from ..utils.config import load_run_config, parse_assignments, parse_grid, parse_list
from ..utils.file_io import format_float, write_csv, write_json


logger = logging.getLogger(__name__)

DATASET_FILE = "dataset.csv"
REPORT_DIR = "report"


def _grid(value: str) -> List[float]:
    try:
        return parse_grid(value)
    except ConfigError as error:
        raise argparse.ArgumentTypeError(str(error))


def _flag() -> dict:
    # store_const keeps "not given" distinguishable from False
    return {"action": "store_const", "const": True, "default": None}


def register(subparsers, parents: List[argparse.ArgumentParser]) -> None:
    evaluate = subparsers.add_parser("evaluate", parents=parents, help="LOOCV evaluation of every configured algorithm")
    evaluate.add_argument("--datasets", type=parse_list, default=None,
                          help="comma list of dataset .conf files, CSV files or names under datasets/")
    evaluate.add_argument("--algorithms", type=parse_list, default=None, help="comma list, e.g. amr,knn,lr,dt")
    evaluate.add_argument("--alpha-grid", type=_grid, default=None, help="list or start:stop:step")
    evaluate.add_argument("--delta-grid", type=_grid, default=None, help="list or start:stop:step")
    evaluate.add_argument("--knn-k", type=int, default=None, help="fixed k for the k-NN baseline (default: LOOCV)")
    evaluate.add_argument("--knn-metric", choices=["euclidean", "manhattan"], default=None)
    evaluate.add_argument("--max-features", type=int, default=None, help="feature selection cap; 0 disables it")
    evaluate.add_argument("--literal-sum", **_flag(), help="sum neighbour contributions instead of averaging")
    evaluate.add_argument("--literal-index-divisor", **_flag(), help="divide shares by the 1-based index")
    evaluate.add_argument("--external", action="append", default=None, metavar="ID=CSV",
                          help="imported predictions (row_index,prediction); {dataset} expands per dataset")
    evaluate.set_defaults(handler=cmd_evaluate)

    compare = subparsers.add_parser("compare", parents=parents, help="permutation test and verdict for one pair")
    compare.add_argument("--pred-dir", required=True, help="dataset directory written by evaluate")
    compare.add_argument("--pair", required=True, type=parse_list, help="two algorithm ids, e.g. amr,knn")
    compare.add_argument("--output-file", default=None, help="JSON path (default <pred-dir>/compare_<a>_vs_<b>.json)")
    compare.set_defaults(handler=cmd_compare)

    report = subparsers.add_parser("report", parents=parents, help="aggregate evaluate results into tables")
    report.add_argument("--results", default=None, help="evaluate output directory (default <out>)")
    report.add_argument("--report-dir", default=None, help=f"where tables go (default <results>/{REPORT_DIR})")
    report.add_argument("--reference", default="amr", help="algorithm every other one is compared against")
    report.add_argument("--rival", default="knn", help="algorithm of the headline count")
    report.add_argument("--published-table", default=None, help="CSV dataset,algorithm,mae of published values")
    report.set_defaults(handler=cmd_report)


# evaluate

def write_run(run: AlgorithmRun, directory: Path) -> None:
    write_json(metrics_path(directory, run.algorithm), run.metrics)

    extra = list(run.extra_columns)
    rows = []
    for index, (actual, predicted) in enumerate(zip(run.actual, run.predictions)):
        row = [str(index), format_float(actual), format_float(predicted)]
        for column in extra:
            value = run.extra_columns[column][index]
            row.append(str(value) if isinstance(value, int) else format_float(value))
        rows.append(row)
    write_csv(predictions_path(directory, run.algorithm), PREDICTION_COLUMNS + extra, rows)


def evaluate_dataset(runner: ExperimentRunner, dataset: Dataset, output_dir: Path) -> int:
    """Run every algorithm on one dataset; returns the number of algorithms that failed"""
    directory = output_dir / dataset.name
    write_numeric_csv(dataset, directory / DATASET_FILE)
    fingerprint = dataset.fingerprint()
    logger.info(f"{dataset.name}: {dataset.n} rows, {dataset.m} regressors, fingerprint {fingerprint}")

    failures = 0
    for algorithm in runner.algorithm_order():
        try:
            write_run(runner.run_one(dataset, algorithm, fingerprint), directory)
        except AmrToolkitError as error:
            failures += 1
            logger.warning(f"{dataset.name}: {algorithm} failed ({type(error).__name__}: {error})")
    return failures


def evaluate_config(config: RunConfig) -> int:
    if not config.datasets:
        raise UsageError("no datasets configured; pass --datasets or set datasets in --config")

    runner = ExperimentRunner(config)
    output_dir = Path(config.output_dir)
    write_json(output_dir / "run_config.json", config)

    failures = 0
    for reference in config.datasets:
        try:
            dataset = prepare_dataset(dataset_config_for(reference), config.max_features)
            failures += evaluate_dataset(runner, dataset, output_dir)
        except (AmrToolkitError, OSError) as error:
            failures += 1
            logger.warning(f"{reference}: dataset skipped ({type(error).__name__}: {error})")

    if failures:
        logger.error(f"evaluate finished with {failures} failure(s)")
        return EXIT_FAILURE
    print(f"evaluated {len(config.datasets)} dataset(s) x {len(runner.algorithm_order())} algorithm(s) -> {output_dir}")
    return EXIT_OK


@command("evaluate")
def cmd_evaluate(args: argparse.Namespace) -> int:
    settings = settings_from(args)
    overrides = {
        "datasets": args.datasets,
        "algorithms": args.algorithms,
        "alpha_grid": args.alpha_grid,
        "delta_grid": args.delta_grid,
        "knn_k": args.knn_k,
        "knn_metric": args.knn_metric,
        "max_features": args.max_features,
        "literal_sum": args.literal_sum,
        "literal_index_divisor": args.literal_index_divisor,
        "external": parse_assignments(args.external) if args.external else None,
    }
    return evaluate_config(load_run_config(settings, overrides))


# compare

@command("compare")
def cmd_compare(args: argparse.Namespace) -> int:
    settings = settings_from(args)
    if len(args.pair) != 2:
        raise UsageError(f"--pair needs exactly two algorithm ids, got {args.pair}")
    algorithm_a, algorithm_b = args.pair

    directory = Path(args.pred_dir)
    if not directory.is_dir():
        raise MissingPredictions(f"prediction directory not found: {directory}")

    results = DatasetResults.from_directory(directory)
    report = compare_algorithms(results, algorithm_a, algorithm_b, settings.n_perm, settings.seed, settings.workers)

    path = Path(args.output_file) if args.output_file else directory / f"compare_{algorithm_a}_vs_{algorithm_b}.json"
    write_json(path, report)
    logger.info(f"{results.name}: {algorithm_a} vs {algorithm_b} verdict {report.verdict.decision.value}")
    print(verdict_line(report))
    return EXIT_OK


# report

@command("report")
def cmd_report(args: argparse.Namespace) -> int:
    settings = settings_from(args)
    results_dir = Path(args.results) if args.results else settings.output_dir
    if not results_dir.is_dir():
        raise MissingPredictions(f"results directory not found: {results_dir}")

    results = collect_results(results_dir)
    if not results:
        raise MissingPredictions(f"no metrics files under {results_dir}")

    builder = ReportBuilder(results, args.reference, settings.n_perm, settings.seed, settings.workers)
    report_dir = Path(args.report_dir) if args.report_dir else results_dir / REPORT_DIR

    for name in METRIC_TABLES:
        write_csv(report_dir / f"{name}.csv", *builder.metric_table(name))
    write_csv(report_dir / "pairwise.csv", *builder.pairwise_table())
    write_csv(report_dir / "error_profile.csv", *builder.error_profile_table())

    published = load_published_table(args.published_table) if args.published_table else None
    if published is not None:
        write_csv(report_dir / "deviation_report.csv", *builder.deviation_table(published))
    headline = builder.headline(args.rival, published)
    write_json(report_dir / "headline.json", headline)

    print(
        f"report: {len(results)} dataset(s), {len(builder.algorithms)} algorithm(s) -> {report_dir}; "
        f"{args.reference} MAE <= {args.rival} on {headline['reference_not_worse']} of "
        f"{headline['datasets_compared']} (majority: {headline['majority']})"
    )
    return EXIT_OK
