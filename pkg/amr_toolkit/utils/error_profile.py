"""
Error profiles for per-instance LOOCV results

Implements the distribution summaries behind the comparison tables:
- Mean and SD of absolute and squared errors
- RMSE with the spread of per-instance absolute errors
- Mean and SD of the predictions themselves
- Quartiles and IQR of the absolute-error distribution

SDs are sample SDs (ddof=1); a single instance has SD 0.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np


logger = logging.getLogger(__name__)

PROFILE_COLUMNS = [
    "dataset", "algorithm",
    "MAE_mean", "MAE_SD", "MAE_p",
    "MSE_mean", "MSE_SD", "MSE_p",
    "RMSE_mean", "RMSE_SD", "RMSE_p",
    "Mean", "SD",
    "AE_Q1", "AE_median", "AE_Q3", "AE_IQR",
]
REFERENCE_MARK = "-"


@dataclass
class ErrorProfile:
    """Error distribution of one algorithm on one dataset"""
    algorithm: str
    mae_mean: float
    mae_sd: float
    mse_mean: float
    mse_sd: float
    rmse_mean: float
    rmse_sd: float
    prediction_mean: float
    prediction_sd: float
    ae_q1: float
    ae_median: float
    ae_q3: float
    ae_iqr: float


class ErrorProfiler:
    """
    Builds ErrorProfile rows and the comparison table around a reference algorithm

    Features:
    - One profile per (dataset, algorithm) from actual and predicted vectors
    - p-values against the reference taken from MAE permutation tests
    - Reference row marked "-" in every p column
    """

    def __init__(self, reference: str = "amr"):
        self.reference = reference

    @staticmethod
    def _sd(values: np.ndarray) -> float:
        return float(np.std(values, ddof=1)) if values.size > 1 else 0.0

    def profile(self, algorithm: str, actual: Sequence[float], predicted: Sequence[float]) -> ErrorProfile:
        actual = np.asarray(actual, dtype=float).reshape(-1)
        predicted = np.asarray(predicted, dtype=float).reshape(-1)
        if actual.size != predicted.size or actual.size == 0:
            raise ValueError(f"cannot profile {actual.size} actual values against {predicted.size} predictions")

        absolute = np.abs(actual - predicted)
        squared = absolute * absolute
        q1, median, q3 = (float(q) for q in np.percentile(absolute, [25, 50, 75]))

        return ErrorProfile(
            algorithm=algorithm,
            mae_mean=float(absolute.mean()),
            mae_sd=self._sd(absolute),
            mse_mean=float(squared.mean()),
            mse_sd=self._sd(squared),
            rmse_mean=math.sqrt(float(squared.mean())),
            rmse_sd=self._sd(absolute),
            prediction_mean=float(predicted.mean()),
            prediction_sd=self._sd(predicted),
            ae_q1=q1,
            ae_median=median,
            ae_q3=q3,
            ae_iqr=q3 - q1,
        )

    def table_rows(
        self,
        dataset: str,
        profiles: Sequence[ErrorProfile],
        p_values: Dict[str, Optional[float]],
    ) -> List[List[str]]:
        """CSV rows in PROFILE_COLUMNS order; the MAE permutation p fills every p column"""
        rows = []
        for profile in profiles:
            if profile.algorithm == self.reference:
                p_cell = REFERENCE_MARK
            else:
                p_value = p_values.get(profile.algorithm)
                p_cell = "" if p_value is None else f"{p_value:.4f}"
            rows.append([
                dataset, profile.algorithm,
                f"{profile.mae_mean:.4f}", f"{profile.mae_sd:.4f}", p_cell,
                f"{profile.mse_mean:.4f}", f"{profile.mse_sd:.4f}", p_cell,
                f"{profile.rmse_mean:.4f}", f"{profile.rmse_sd:.4f}", p_cell,
                f"{profile.prediction_mean:.4f}", f"{profile.prediction_sd:.4f}",
                f"{profile.ae_q1:.4f}", f"{profile.ae_median:.4f}", f"{profile.ae_q3:.4f}", f"{profile.ae_iqr:.4f}",
            ])
        return rows
