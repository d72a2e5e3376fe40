"""
Per-dataset evaluation runs

Handles:
- AMR through the LOOCV grid search, with the closed-form blend cross-check
- Baselines through the generic LOOCV driver (k-NN k chosen by LOOCV when unset)
- External per-instance predictions imported from CSV
- One MetricSet per algorithm, carrying the dataset fingerprint

ET covers everything an algorithm needs to produce its predictions:
the full grid for AMR, k selection plus LOOCV for k-NN.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional

import numpy as np

from .amr_regressor import AmrGridSearch, cross_check_alpha
from .baselines import BASELINE_IDS, KnnConfig, TreeConfig, load_external_predictions, make_regressor, select_knn_k
from .data_ingest import Dataset
from .evaluation import build_metric_set, loocv, timed
from .exceptions import IdenticalPredictors, UsageError
from ..models.regression_models import MetricSet, RunConfig


logger = logging.getLogger(__name__)

AMR_ID = "amr"


@dataclass
class AlgorithmRun:
    """Predictions and metrics of one algorithm on one dataset"""
    algorithm: str
    metrics: MetricSet
    actual: np.ndarray
    predictions: np.ndarray
    extra_columns: Dict[str, List[float]] = field(default_factory=dict)


def check_algorithms(config: RunConfig) -> None:
    """Every configured id must be amr, a baseline or an external file"""
    known = {AMR_ID, *BASELINE_IDS, *config.external}
    unknown = [a for a in config.algorithms if a not in known]
    if unknown:
        raise UsageError(
            f"unknown algorithm id(s) {', '.join(unknown)}; "
            f"expected {AMR_ID}, {', '.join(BASELINE_IDS)} or an --external id"
        )
    clashes = [a for a in config.external if a in (AMR_ID, *BASELINE_IDS)]
    if clashes:
        raise UsageError(f"external ids must not shadow built-in algorithms: {', '.join(clashes)}")


class ExperimentRunner:
    """
    Runs the configured algorithms on one dataset at a time

    Features:
    - Algorithms in configured order, external imports after them
    - AMR hyperparameters and alpha cross-check recorded in MetricSet.details
    - Deterministic: no randomness anywhere in the evaluate path
    """

    def __init__(self, config: RunConfig):
        check_algorithms(config)
        self.config = config
        self.tree = TreeConfig(max_depth=config.tree.max_depth, min_leaf=config.tree.min_leaf)

    def run_amr(self, dataset: Dataset, fingerprint: str) -> AlgorithmRun:
        search = AmrGridSearch(
            alpha_grid=self.config.alpha_grid,
            delta_grid=self.config.delta_grid,
            literal_sum=self.config.literal_sum,
            literal_index_divisor=self.config.literal_index_divisor,
            workers=self.config.workers,
        )
        result = search.run(dataset)

        details = {
            "grid_search": result.model_dump(),
            "k_last": result.k_last,
            "grid_points": result.evaluated_points,
            "literal_sum": self.config.literal_sum,
            "literal_index_divisor": self.config.literal_index_divisor,
        }
        try:
            details["alpha_hat"] = cross_check_alpha(
                dataset, result, self.config.literal_sum, self.config.literal_index_divisor
            ).model_dump()
        except IdenticalPredictors as error:
            logger.warning(f"{dataset.name}: alpha cross-check skipped ({error})")
            details["alpha_hat"] = None

        metrics = build_metric_set(
            dataset.y, search.predictions, result.et_seconds, AMR_ID, dataset.name, fingerprint, details
        )
        extra = {
            "y_hat_ama": [t.y_hat_ama for t in search.traces],
            "y_hat_knn": [t.y_hat_knn for t in search.traces],
            "k": [t.k for t in search.traces],
            "dist_min": [t.dist_min for t in search.traces],
        }
        return AlgorithmRun(AMR_ID, metrics, np.array(dataset.y), search.predictions, extra)

    def run_baseline(self, dataset: Dataset, algorithm: str, fingerprint: str) -> AlgorithmRun:
        details: Dict[str, object] = {}

        def pipeline():
            knn = None
            if algorithm == "knn":
                k = self.config.knn.k
                if k is None:
                    k = select_knn_k(dataset.X, dataset.y, self.config.knn.metric)
                    details["k_selected_by_loocv"] = True
                knn = KnnConfig(k=k, metric=self.config.knn.metric)
                details.update(k=k, metric=knn.metric)
            elif algorithm == "dt":
                details.update(max_depth=self.tree.max_depth, min_leaf=self.tree.min_leaf)
            regressor = make_regressor(algorithm, knn=knn, tree=self.tree)
            return loocv(dataset.X, dataset.y, regressor, workers=self.config.workers)

        (actual, predictions), et = timed(pipeline)
        metrics = build_metric_set(actual, predictions, et, algorithm, dataset.name, fingerprint, details)
        logger.info(f"{dataset.name}: {algorithm} MAE={metrics.mae:.6g} ({et:.2f}s)")
        return AlgorithmRun(algorithm, metrics, actual, predictions)

    def run_external(self, dataset: Dataset, algorithm: str, fingerprint: str) -> AlgorithmRun:
        # `{dataset}` in the path selects one file per dataset
        path = self.config.external[algorithm].replace("{dataset}", dataset.name)
        predictions = load_external_predictions(path, dataset.n)
        # ET of an imported algorithm is unknown; it is recorded as 0 and flagged
        metrics = build_metric_set(
            dataset.y, predictions, 0.0, algorithm, dataset.name, fingerprint,
            {"external": True, "source": str(path)},
        )
        logger.info(f"{dataset.name}: imported {algorithm} predictions from {path}")
        return AlgorithmRun(algorithm, metrics, np.array(dataset.y), predictions)

    def algorithm_order(self) -> List[str]:
        order = list(self.config.algorithms)
        order += [a for a in self.config.external if a not in order]
        return order

    def run_one(self, dataset: Dataset, algorithm: str, fingerprint: Optional[str] = None) -> AlgorithmRun:
        fingerprint = fingerprint or dataset.fingerprint()
        if algorithm == AMR_ID:
            return self.run_amr(dataset, fingerprint)
        if algorithm in self.config.external:
            return self.run_external(dataset, algorithm, fingerprint)
        return self.run_baseline(dataset, algorithm, fingerprint)

    def run(self, dataset: Dataset) -> Iterator[AlgorithmRun]:
        fingerprint = dataset.fingerprint()
        for algorithm in self.algorithm_order():
            yield self.run_one(dataset, algorithm, fingerprint)
