"""
Data Models for the AMR toolkit

Defines:
- Validation and theory-check records
- Hyperparameters and grid-search results
- Evaluation metrics, permutation-test results and verdicts
- Run configuration and error reports

Every model serialises to the JSON files the CLI writes.
"""

import math
from datetime import datetime
from enum import Enum
from typing import Any, ClassVar, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


GRID_TOLERANCE = 1e-9


# AMA validation

class ValidationRecord(BaseModel):
    """One checkpoint of the arithmetic-method validation sweep"""
    i: int = Field(..., ge=1, description="Dimension count")
    y: float
    y_hat: float
    t: float = Field(..., ge=0.0, description="Execution time in seconds")
    eps: float = Field(..., ge=0.0, description="Percentage error")

    CSV_HEADER: ClassVar[List[str]] = ["i", "y", "y_hat", "t_seconds", "eps_percent"]

    model_config = ConfigDict(frozen=True)

    def csv_row(self) -> List[str]:
        return [str(self.i), repr(self.y), repr(self.y_hat), repr(self.t), repr(self.eps)]


# Theory checks

class BoundReport(BaseModel):
    """Two sides of an inequality and whether it holds"""
    lhs: float = Field(..., ge=0.0)
    rhs: float = Field(..., ge=0.0)
    holds: bool
    slack: float

    @classmethod
    def compare(cls, lhs: float, rhs: float) -> "BoundReport":
        holds = lhs <= rhs + 1e-9 * max(1.0, rhs)
        return cls(lhs=lhs, rhs=rhs, holds=holds, slack=rhs - lhs)


class ExistenceReport(BaseModel):
    """Left-inverse identity and coincidence with the pseudoinverse for one row"""
    left_identity_error: float = Field(..., ge=0.0)
    residual: float = Field(..., ge=0.0)
    operator_gap: float = Field(..., ge=0.0)
    solves_system: bool
    coincides_with_pseudoinverse: bool


class SuiteSummary(BaseModel):
    """Pass counts of one randomized theory suite"""
    name: str
    trials: int
    passed: int
    violations: List[Dict[str, Any]] = Field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.passed == self.trials


class TheoryCheckReport(BaseModel):
    seed: int
    trials: int
    suites: List[SuiteSummary]
    all_hold: bool


# AMR

class HyperParams(BaseModel):
    """Blend weights and neighbourhood factor for one AMR prediction"""
    alpha: float = Field(..., gt=0.0, le=1.0)
    beta: float = Field(..., ge=0.0, lt=1.0)
    delta: float = Field(..., ge=1.0, le=10.0)

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _weights_sum_to_one(self) -> "HyperParams":
        if abs(self.alpha + self.beta - 1.0) > GRID_TOLERANCE:
            raise ValueError(f"alpha + beta must equal 1, got {self.alpha} + {self.beta}")
        return self

    @classmethod
    def from_alpha(cls, alpha: float, delta: float) -> "HyperParams":
        return cls(alpha=alpha, beta=round(1.0 - alpha, 10), delta=delta)


class GridSearchResult(BaseModel):
    """Optimum of the (delta, alpha) LOOCV grid"""
    mae_op: float = Field(..., ge=0.0)
    mse_op: float = Field(..., ge=0.0)
    rmse_op: float = Field(..., ge=0.0)
    r2_op: Optional[float] = None
    alpha_op: float
    beta_op: float
    delta_op: float = Field(..., ge=1.0, le=10.0)
    k_op: int = Field(..., ge=1, description="Rounded mean neighbour count across folds")
    et_seconds: float = Field(..., ge=0.0)

    # diagnostics, not part of the serialised result
    k_last: int = Field(1, ge=1, exclude=True, description="Neighbour count of the final fold")
    evaluated_points: int = Field(0, ge=0, exclude=True)

    @model_validator(mode="after")
    def _weights_sum_to_one(self) -> "GridSearchResult":
        if abs(self.alpha_op + self.beta_op - 1.0) > GRID_TOLERANCE:
            raise ValueError("alpha_op + beta_op must equal 1")
        return self


class AlphaCrossCheck(BaseModel):
    """Closed-form blend estimate next to the grid optimum"""
    delta: float
    alpha_op: float
    alpha_hat: float
    alpha_hat_clipped: float = Field(..., ge=0.0, le=1.0)
    risk_at_alpha_hat: float = Field(..., ge=0.0)
    risk_at_alpha_hat_clipped: float = Field(..., ge=0.0)
    risk_at_alpha_op: float = Field(..., ge=0.0)


# Evaluation

class MetricSet(BaseModel):
    """Evaluation metrics of one algorithm on one dataset"""
    mae: float = Field(..., ge=0.0)
    mse: float = Field(..., ge=0.0)
    rmse: float = Field(..., ge=0.0)
    r2: Optional[float] = Field(None, le=1.0)
    et: float = Field(0.0, ge=0.0, description="Execution time in seconds")

    algorithm: Optional[str] = None
    dataset: Optional[str] = None
    n: Optional[int] = None
    fingerprint: Optional[str] = None
    details: Dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _rmse_matches_mse(self) -> "MetricSet":
        if not math.isclose(self.rmse * self.rmse, self.mse, rel_tol=1e-9, abs_tol=1e-300):
            raise ValueError(f"rmse^2 ({self.rmse ** 2}) does not match mse ({self.mse})")
        return self


class PermTestResult(BaseModel):
    """Two-tailed paired permutation test on per-instance absolute errors"""
    dif_obs: float
    p_value: float = Field(..., gt=0.0, le=1.0)
    n_perms: int = Field(..., ge=1)
    exhaustive: bool
    seed: int

    @model_validator(mode="after")
    def _exhaustive_count(self) -> "PermTestResult":
        if self.exhaustive and self.n_perms & (self.n_perms - 1):
            raise ValueError("exhaustive enumeration must cover 2^n sign assignments")
        return self


class Decision(str, Enum):
    A_BETTER = "A_better"
    B_BETTER = "B_better"
    SIMILAR = "similar"


class EtPreference(str, Enum):
    A = "A"
    B = "B"


class Verdict(BaseModel):
    """Outcome of the optimal-inference decision rule"""
    decision: Decision
    significant: bool
    et_preference: Optional[EtPreference] = None
    annotations: Dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _decision_needs_significance(self) -> "Verdict":
        if self.decision != Decision.SIMILAR and not self.significant:
            raise ValueError("a non-similar decision requires a significant test")
        return self


class ComparisonReport(BaseModel):
    """What `compare` writes: the test and the verdict for one pair"""
    dataset: Optional[str] = None
    algorithm_a: str
    algorithm_b: str
    perm: PermTestResult
    verdict: Verdict


# Configuration

class KnnSettings(BaseModel):
    k: Optional[int] = Field(None, ge=1, description="None selects k by LOOCV")
    metric: str = "euclidean"

    @field_validator("metric")
    @classmethod
    def _known_metric(cls, value: str) -> str:
        if value not in {"euclidean", "manhattan"}:
            raise ValueError(f"unknown k-NN metric {value!r}")
        return value


class TreeSettings(BaseModel):
    max_depth: int = Field(8, ge=0)
    min_leaf: int = Field(2, ge=1)


class RunConfig(BaseModel):
    """Everything `evaluate` needs for a reproducible run"""
    datasets: List[str] = Field(default_factory=list)
    algorithms: List[str] = Field(..., min_length=1)
    alpha_grid: List[float]
    delta_grid: List[float]
    n_perm: int = Field(5000, ge=1)
    seed: int = 20240101
    output_dir: str = "results"
    knn: KnnSettings = Field(default_factory=KnnSettings)
    tree: TreeSettings = Field(default_factory=TreeSettings)
    workers: int = Field(1, ge=1)
    literal_sum: bool = False
    literal_index_divisor: bool = False
    max_features: Optional[int] = Field(None, ge=0)
    external: Dict[str, str] = Field(default_factory=dict)

    @field_validator("alpha_grid")
    @classmethod
    def _alpha_in_range(cls, grid: List[float]) -> List[float]:
        if not grid:
            raise ValueError("alpha grid must not be empty")
        if any(not (0.0 < a <= 1.0) for a in grid):
            raise ValueError("alpha grid values must lie in (0, 1]")
        return grid

    @field_validator("delta_grid")
    @classmethod
    def _delta_in_range(cls, grid: List[float]) -> List[float]:
        if not grid:
            raise ValueError("delta grid must not be empty")
        if any(not (1.0 <= d <= 10.0) for d in grid):
            raise ValueError("delta grid values must lie in [1, 10]")
        return grid


# Errors

class ErrorReport(BaseModel):
    """Standard error record written by controllers"""
    error: str
    error_code: str
    details: Optional[str] = None
    timestamp: datetime = Field(default_factory=datetime.now)
