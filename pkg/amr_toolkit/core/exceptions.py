"""
Exception hierarchy for the AMR toolkit

Every failure the numerical engines can report derives from
AmrToolkitError, so controllers can map any of them to an ErrorReport
and an exit status with a single except clause.
"""

from typing import Optional


class AmrToolkitError(Exception):
    """Base class for all toolkit errors"""

    error_code = "AMR_ERROR"

    def __init__(self, message: str = "", *, fold_index: Optional[int] = None):
        super().__init__(message)
        self.message = message
        self.fold_index = fold_index

    def with_fold(self, fold_index: int) -> "AmrToolkitError":
        """Tag the error with the LOOCV fold it was raised in"""
        self.fold_index = fold_index
        return self

    def __str__(self) -> str:
        if self.fold_index is not None:
            return f"{self.message} (fold {self.fold_index})"
        return self.message


class InvalidParameter(AmrToolkitError, ValueError):
    error_code = "INVALID_PARAMETER"


class EmptyVector(AmrToolkitError):
    error_code = "EMPTY_VECTOR"


class LengthMismatch(AmrToolkitError):
    error_code = "LENGTH_MISMATCH"


class DegenerateInstance(AmrToolkitError):
    """All regressors (or coefficients) are zero while the target is not"""

    error_code = "DEGENERATE_INSTANCE"

    def __init__(
        self,
        message: str = "",
        *,
        row_index: Optional[int] = None,
        fold_index: Optional[int] = None,
    ):
        super().__init__(message, fold_index=fold_index)
        self.row_index = row_index

    def __str__(self) -> str:
        text = self.message
        if self.row_index is not None:
            text = f"{text} (row {self.row_index})"
        if self.fold_index is not None:
            text = f"{text} (fold {self.fold_index})"
        return text


class RankDeficient(AmrToolkitError):
    error_code = "RANK_DEFICIENT"


class NonConvergence(AmrToolkitError):
    error_code = "NON_CONVERGENCE"


class IdenticalPredictors(AmrToolkitError):
    error_code = "IDENTICAL_PREDICTORS"


class EmptyModel(AmrToolkitError):
    error_code = "EMPTY_MODEL"


class InsufficientData(AmrToolkitError):
    error_code = "INSUFFICIENT_DATA"


class ConstantTarget(AmrToolkitError):
    error_code = "CONSTANT_TARGET"


class ParseError(AmrToolkitError):
    error_code = "PARSE_ERROR"

    def __init__(self, message: str = "", *, line_number: Optional[int] = None):
        super().__init__(message)
        self.line_number = line_number

    def __str__(self) -> str:
        if self.line_number is not None:
            return f"line {self.line_number}: {self.message}"
        return self.message


class UnknownColumn(AmrToolkitError):
    error_code = "UNKNOWN_COLUMN"


class AllRowsRemoved(AmrToolkitError):
    error_code = "ALL_ROWS_REMOVED"


class MissingPredictions(AmrToolkitError):
    error_code = "MISSING_PREDICTIONS"


class RowCountMismatch(AmrToolkitError):
    error_code = "ROW_COUNT_MISMATCH"


class ConfigError(AmrToolkitError):
    error_code = "CONFIG_ERROR"


class UsageError(AmrToolkitError):
    error_code = "USAGE_ERROR"
