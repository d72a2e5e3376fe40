"""
Result aggregation and pairwise comparison

Handles:
- The on-disk layout `evaluate` writes (one directory per dataset)
- Reading prediction files back for permutation tests
- Pairwise comparisons (permutation test plus decision rule)
- Per-metric tables with a `best` column, the pairwise table, error profiles
- Deviation of produced MAE values from a published MAE table, and the headline count
"""

import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .baselines import BASELINE_IDS
from .evaluation import PermutationTester, absolute_errors, build_metric_set, decision_rule
from .exceptions import MissingPredictions, ParseError, RowCountMismatch
from ..models.regression_models import ComparisonReport, MetricSet
from ..utils.error_profile import PROFILE_COLUMNS, ErrorProfiler
from ..utils.file_io import index_column, numeric_column, read_table
from ..utils.seeding import derive_seed


logger = logging.getLogger(__name__)

PREDICTION_COLUMNS = ["row_index", "actual", "prediction"]
METRIC_TABLES = {
    # name: (MetricSet field, higher is better)
    "mae": ("mae", False),
    "mse": ("mse", False),
    "rmse": ("rmse", False),
    "r2": ("r2", True),
    "et": ("et", False),
}
DEVIATION_COLUMNS = ["dataset", "algorithm", "ours", "published", "abs_diff", "rel_diff"]
Table = Tuple[List[str], List[List[str]]]


def metrics_path(dataset_dir: Path, algorithm: str) -> Path:
    return Path(dataset_dir) / f"metrics_{algorithm}.json"


def predictions_path(dataset_dir: Path, algorithm: str) -> Path:
    return Path(dataset_dir) / f"predictions_{algorithm}.csv"


def natural_key(name: str) -> List[Union[int, str]]:
    """Data-2 sorts before Data-10"""
    return [int(part) if part.isdigit() else part.lower() for part in re.split(r"(\d+)", name)]


def pair_seed(root_seed: int, algorithm_a: str, algorithm_b: str) -> int:
    """Seed of one pair's Monte Carlo stream; independent of which side is A"""
    first, second = sorted((algorithm_a, algorithm_b))
    return derive_seed(root_seed, f"permutation:{first}-{second}")


def _cell(value: Optional[float]) -> str:
    return "" if value is None else f"{value:.4f}"


def read_predictions(path: Union[str, Path]) -> Tuple[np.ndarray, np.ndarray]:
    """(actual, prediction) columns of a prediction file, in row_index order"""
    path = Path(path)
    if not path.exists():
        raise MissingPredictions(f"prediction file not found: {path}")

    frame = read_table(path, PREDICTION_COLUMNS)
    row_index = index_column(frame, "row_index", path.name)
    if not np.array_equal(np.sort(row_index), np.arange(row_index.size)):
        raise MissingPredictions(f"{path.name}: row indices are not 0..{row_index.size - 1}")
    order = np.argsort(row_index)
    actual = numeric_column(frame, "actual", path.name)
    predicted = numeric_column(frame, "prediction", path.name)
    return actual[order], predicted[order]


@dataclass
class DatasetResults:
    """Everything `evaluate` left in one dataset directory"""
    name: str
    directory: Path
    metrics: Dict[str, MetricSet] = field(default_factory=dict)

    def load_metrics(self, algorithm: str) -> MetricSet:
        """Stored MetricSet, or one rebuilt from the predictions (ET 0) when the JSON is absent"""
        if algorithm in self.metrics:
            return self.metrics[algorithm]
        actual, predicted = read_predictions(predictions_path(self.directory, algorithm))
        logger.warning(f"{self.name}: no metrics file for {algorithm}; rebuilt from predictions")
        metrics = build_metric_set(actual, predicted, 0.0, algorithm, self.name)
        self.metrics[algorithm] = metrics
        return metrics

    @classmethod
    def from_directory(cls, directory: Path) -> "DatasetResults":
        directory = Path(directory)
        results = cls(name=directory.name, directory=directory)
        for path in sorted(directory.glob("metrics_*.json")):
            algorithm = path.stem[len("metrics_"):]
            results.metrics[algorithm] = MetricSet.model_validate_json(path.read_text(encoding="utf-8"))
        return results


def collect_results(results_dir: Union[str, Path]) -> List[DatasetResults]:
    """Dataset directories under results_dir holding at least one MetricSet, naturally sorted"""
    results_dir = Path(results_dir)
    found = []
    for directory in sorted((d for d in results_dir.iterdir() if d.is_dir()), key=lambda d: natural_key(d.name)):
        results = DatasetResults.from_directory(directory)
        if results.metrics:
            found.append(results)
    return found


def ordered_algorithms(results: Sequence[DatasetResults], reference: str) -> List[str]:
    """Reference first, then the built-in baselines, then everything else alphabetically"""
    present = {a for r in results for a in r.metrics}
    order = [a for a in (reference, *BASELINE_IDS) if a in present]
    return order + sorted(present - set(order))


def compare_algorithms(
    results: DatasetResults,
    algorithm_a: str,
    algorithm_b: str,
    n_perm: int,
    root_seed: int,
    workers: int = 1,
) -> ComparisonReport:
    """Permutation test on per-instance absolute errors, then the decision rule"""
    actual_a, predicted_a = read_predictions(predictions_path(results.directory, algorithm_a))
    actual_b, predicted_b = read_predictions(predictions_path(results.directory, algorithm_b))
    if actual_a.size != actual_b.size:
        raise RowCountMismatch(
            f"{results.name}: {algorithm_a} has {actual_a.size} predictions, {algorithm_b} has {actual_b.size}"
        )
    if not np.array_equal(actual_a, actual_b):
        raise RowCountMismatch(f"{results.name}: {algorithm_a} and {algorithm_b} were run on different rows")

    tester = PermutationTester(n_perm=n_perm, seed=pair_seed(root_seed, algorithm_a, algorithm_b), workers=workers)
    perm = tester.test(absolute_errors(actual_a, predicted_a), absolute_errors(actual_b, predicted_b))
    verdict = decision_rule(results.load_metrics(algorithm_a), results.load_metrics(algorithm_b), perm)
    return ComparisonReport(
        dataset=results.name, algorithm_a=algorithm_a, algorithm_b=algorithm_b, perm=perm, verdict=verdict
    )


def verdict_line(report: ComparisonReport) -> str:
    verdict = report.verdict
    line = (
        f"{report.dataset}: {report.algorithm_a} vs {report.algorithm_b} -> {verdict.decision.value} "
        f"(dif_obs={report.perm.dif_obs:.6g}, p={report.perm.p_value:.4g}, "
        f"{report.perm.n_perms} {'exhaustive' if report.perm.exhaustive else 'sampled'} permutations)"
    )
    if verdict.et_preference is not None:
        preferred = report.algorithm_a if verdict.et_preference.value == "A" else report.algorithm_b
        line += f"; lower ET: {preferred}"
    return line


def load_published_table(path: Union[str, Path]) -> Dict[Tuple[str, str], float]:
    """Published MAE values keyed by (dataset, algorithm)"""
    path = Path(path)
    if not path.exists():
        raise MissingPredictions(f"published table not found: {path}")
    frame = read_table(path, ["dataset", "algorithm", "mae"])
    if frame[["dataset", "algorithm"]].isna().to_numpy().any():
        raise ParseError(f"{path.name}: empty dataset or algorithm cell")
    values = numeric_column(frame, "mae", path.name)
    datasets = frame["dataset"].str.strip()
    algorithms = frame["algorithm"].str.strip().str.lower()
    return {(dataset, algorithm): float(value) for dataset, algorithm, value in zip(datasets, algorithms, values)}


class ReportBuilder:
    """
    Builds every table `report` writes from an evaluate output directory

    Features:
    - Metric tables (one row per dataset, one column per algorithm, `best` column)
    - Pairwise table of reference-vs-other permutation tests and verdicts
    - Error profiles with MAE permutation p-values
    - Deviation report and headline against a published MAE table
    """

    def __init__(
        self,
        results: Sequence[DatasetResults],
        reference: str = "amr",
        n_perm: int = 5000,
        seed: int = 0,
        workers: int = 1,
    ):
        self.results = list(results)
        self.reference = reference
        self.n_perm = n_perm
        self.seed = seed
        self.workers = workers
        self.algorithms = ordered_algorithms(self.results, reference)
        self._comparisons: Dict[Tuple[str, str], Optional[ComparisonReport]] = {}

    @staticmethod
    def _is_external(metrics: MetricSet) -> bool:
        return bool(metrics.details.get("external"))

    def metric_table(self, name: str) -> Table:
        attribute, higher_is_better = METRIC_TABLES[name]
        rows = []
        for results in self.results:
            values: Dict[str, Optional[float]] = {}
            for algorithm in self.algorithms:
                metrics = results.metrics.get(algorithm)
                if metrics is None or (name == "et" and self._is_external(metrics)):
                    values[algorithm] = None
                else:
                    values[algorithm] = getattr(metrics, attribute)

            scored = {a: v for a, v in values.items() if v is not None}
            best = ""
            if scored:
                target = max(scored.values()) if higher_is_better else min(scored.values())
                best = ";".join(a for a, v in scored.items() if v == target)
            rows.append([results.name] + [_cell(values[a]) for a in self.algorithms] + [best])
        return ["dataset", *self.algorithms, "best"], rows

    def comparison(self, results: DatasetResults, other: str) -> Optional[ComparisonReport]:
        key = (results.name, other)
        if key not in self._comparisons:
            report = None
            if self.reference in results.metrics and other in results.metrics:
                try:
                    report = compare_algorithms(results, self.reference, other, self.n_perm, self.seed, self.workers)
                except (MissingPredictions, RowCountMismatch, ParseError) as error:
                    logger.warning(f"{results.name}: {self.reference} vs {other} skipped ({error})")
            self._comparisons[key] = report
        return self._comparisons[key]

    def pairwise_table(self) -> Table:
        others = [a for a in self.algorithms if a != self.reference]
        header = ["dataset"]
        for other in others:
            pair = f"{self.reference}_vs_{other}"
            header += [f"{pair}_dif_obs", f"{pair}_p_value", f"{pair}_verdict"]

        rows = []
        for results in self.results:
            row = [results.name]
            for other in others:
                report = self.comparison(results, other)
                if report is None:
                    row += ["", "", ""]
                else:
                    row += [f"{report.perm.dif_obs:.4f}", f"{report.perm.p_value:.4f}", report.verdict.decision.value]
            rows.append(row)
        return header, rows

    def error_profile_table(self) -> Table:
        profiler = ErrorProfiler(reference=self.reference)
        rows = []
        for results in self.results:
            profiles, p_values = [], {}
            for algorithm in self.algorithms:
                if algorithm not in results.metrics:
                    continue
                try:
                    actual, predicted = read_predictions(predictions_path(results.directory, algorithm))
                except (MissingPredictions, ParseError) as error:
                    logger.warning(f"{results.name}: no error profile for {algorithm} ({error})")
                    continue
                profiles.append(profiler.profile(algorithm, actual, predicted))
                if algorithm != self.reference:
                    report = self.comparison(results, algorithm)
                    p_values[algorithm] = report.perm.p_value if report else None
            rows += profiler.table_rows(results.name, profiles, p_values)
        return list(PROFILE_COLUMNS), rows

    def deviation_table(self, published_table: Dict[Tuple[str, str], float]) -> Table:
        rows = []
        for results in self.results:
            for algorithm in self.algorithms:
                metrics = results.metrics.get(algorithm)
                if metrics is None:
                    continue
                published = published_table.get((results.name, algorithm))
                if published is None:
                    rows.append([results.name, algorithm, f"{metrics.mae:.4f}", "", "", ""])
                    continue
                difference = abs(metrics.mae - published)
                relative = f"{difference / abs(published):.4f}" if published != 0 else ""
                rows.append([results.name, algorithm, f"{metrics.mae:.4f}", f"{published:.4f}",
                             f"{difference:.4f}", relative])
        return list(DEVIATION_COLUMNS), rows

    def headline(
        self,
        rival: str = "knn",
        published_table: Optional[Dict[Tuple[str, str], float]] = None,
    ) -> Dict[str, object]:
        """Datasets where the reference MAE is at most the rival's, ours and (if given) published"""
        compared, wins = [], []
        for results in self.results:
            ours, theirs = results.metrics.get(self.reference), results.metrics.get(rival)
            if ours is None or theirs is None:
                continue
            compared.append(results.name)
            if ours.mae <= theirs.mae:
                wins.append(results.name)

        summary: Dict[str, object] = {
            "reference": self.reference,
            "rival": rival,
            "datasets_compared": len(compared),
            "reference_not_worse": len(wins),
            "majority": len(wins) * 2 > len(compared) if compared else False,
            "datasets_not_worse": wins,
        }
        if published_table is not None:
            names = sorted({d for d, _ in published_table}, key=natural_key)
            published = [
                d for d in names
                if (d, self.reference) in published_table and (d, rival) in published_table
                and published_table[(d, self.reference)] <= published_table[(d, rival)]
            ]
            summary["published_not_worse"] = len(published)
            summary["published_datasets"] = sum(
                1 for d in names if (d, self.reference) in published_table and (d, rival) in published_table
            )
        return summary
