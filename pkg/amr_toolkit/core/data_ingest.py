"""
Dataset ingestion and preprocessing

Handles:
- Delimited text loading into a verbatim string table
- Removal of rows carrying the missing-value token
- Nominal-to-numeric ordinal encoding (first appearance order)
- Correlation-based feature subset selection (greedy merit search)
- Canonical numeric CSV export/import and dataset fingerprints
- Per-dataset `key = value` config files
"""

import csv
import hashlib
import io
import logging
import math
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from .exceptions import (
    AllRowsRemoved,
    ConfigError,
    ConstantTarget,
    InsufficientData,
    InvalidParameter,
    ParseError,
    UnknownColumn,
)
from ..utils.config import parse_bool, read_key_value_file
from ..utils.file_io import format_float, write_text


logger = logging.getLogger(__name__)

DEFAULT_MISSING_TOKEN = "?"
DELIMITERS = {"comma": ",", "tab": "\t", "semicolon": ";", ",": ",", "\\t": "\t", ";": ";"}
MERIT_TOLERANCE = 1e-9


@dataclass(frozen=True)
class RawTable:
    """Verbatim string cells of a delimited file, target column resolved"""
    header: Tuple[str, ...]
    cells: Tuple[Tuple[str, ...], ...]
    target_index: int
    missing_token: str = DEFAULT_MISSING_TOKEN
    name: str = "dataset"
    removed_rows: int = 0

    def __post_init__(self):
        width = len(self.header)
        for row in self.cells:
            if len(row) != width:
                raise ParseError(f"row has {len(row)} cells, header has {width}")
        if not 0 <= self.target_index < width:
            raise UnknownColumn(f"target index {self.target_index} outside 0..{width - 1}")

    @property
    def n_rows(self) -> int:
        return len(self.cells)


@dataclass(frozen=True, eq=False)
class Dataset:
    """Numeric regressors X (n x m) and regressand y, ready for the regressors"""
    X: np.ndarray
    y: np.ndarray
    feature_names: Tuple[str, ...]
    name: str = "dataset"
    removed_rows: int = field(default=0, compare=False)

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.X, dtype=float))
        y = np.asarray(self.y, dtype=float).reshape(-1)
        if X.shape[0] != y.size:
            raise InvalidParameter(f"X has {X.shape[0]} rows, y has {y.size}")
        if y.size < 2:
            raise InsufficientData("a dataset needs at least 2 rows")
        if X.shape[1] < 1:
            raise InsufficientData("a dataset needs at least 1 regressor")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise InvalidParameter("dataset contains non-finite values")
        if len(self.feature_names) != X.shape[1]:
            raise InvalidParameter(f"{len(self.feature_names)} feature names for {X.shape[1]} columns")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))

    @property
    def n(self) -> int:
        return int(self.y.size)

    @property
    def m(self) -> int:
        return int(self.X.shape[1])

    def select(self, indices: Sequence[int]) -> "Dataset":
        indices = list(indices)
        return replace(
            self,
            X=self.X[:, indices].copy(),
            feature_names=tuple(self.feature_names[i] for i in indices),
        )

    def fingerprint(self) -> str:
        """MD5 of the canonical numeric CSV"""
        return hashlib.md5(canonical_csv(self).encode()).hexdigest()


# Loading

def _resolve_delimiter(delimiter: str) -> str:
    resolved = DELIMITERS.get(delimiter, delimiter)
    if len(resolved) != 1:
        raise ConfigError(f"unsupported delimiter {delimiter!r}")
    return resolved


def _resolve_target(header: Sequence[str], target_column: Union[str, int, None]) -> int:
    if target_column is None or target_column == "":
        return len(header) - 1
    if isinstance(target_column, int):
        index = target_column
    else:
        names = [h.strip() for h in header]
        if target_column.strip() in names:
            return names.index(target_column.strip())
        try:
            index = int(target_column)
        except ValueError:
            raise UnknownColumn(f"no column named {target_column!r} (header: {', '.join(names)})")
    if index < 0:
        index += len(header)
    if not 0 <= index < len(header):
        raise UnknownColumn(f"column index {target_column} outside 0..{len(header) - 1}")
    return index


def _line_number(error: Exception) -> Optional[int]:
    match = re.search(r"line (\d+)", str(error))
    return int(match.group(1)) if match else None


def load_csv(
    path: Union[str, Path],
    target_column: Union[str, int, None] = None,
    missing_token: str = DEFAULT_MISSING_TOKEN,
    delimiter: str = ",",
) -> RawTable:
    """
    Read a UTF-8 delimited file with a header row

    The target is resolved by header name or index (negative counts from
    the end); default is the last column. Blank lines are skipped, ragged
    rows raise ParseError with their line number.
    """

    path = Path(path)
    if not path.exists():
        raise ParseError(f"file not found: {path}")

    # blank lines stay in the frame so that row labels are line numbers - 1
    try:
        frame = pd.read_csv(
            path,
            sep=_resolve_delimiter(delimiter),
            header=None,
            dtype=str,
            keep_default_na=False,
            skip_blank_lines=False,
            encoding="utf-8-sig",
        )
    except pd.errors.EmptyDataError:
        raise ParseError(f"{path.name}: no header row")
    except pd.errors.ParserError as error:
        raise ParseError(f"{path.name}: {error}", line_number=_line_number(error))

    if frame.empty:
        raise ParseError(f"{path.name}: no header row")

    absent = frame.isna()
    stripped = frame.apply(lambda column: column.str.strip())
    blank = (absent | stripped.eq("")).all(axis=1)
    content = stripped[~blank]
    if content.empty:
        raise ParseError(f"{path.name}: no header row")

    short = absent[~blank].any(axis=1)
    if short.any():
        label = short.idxmax()
        raise ParseError(
            f"{path.name}: expected {frame.shape[1]} cells, found {int((~absent.loc[label]).sum())}",
            line_number=int(label) + 1,
        )

    rows = list(content.itertuples(index=False, name=None))
    header = tuple(rows[0])
    table = RawTable(
        header=header,
        cells=tuple(tuple(row) for row in rows[1:]),
        target_index=_resolve_target(header, target_column),
        missing_token=missing_token,
        name=path.stem,
    )
    logger.info(f"Loaded {path.name}: {table.n_rows} rows, {len(header)} columns")
    return table


def drop_missing(table: RawTable) -> RawTable:
    """Remove every row holding the missing token in any cell"""
    token = table.missing_token
    if not token:
        return table
    kept = tuple(row for row in table.cells if token not in row)
    removed = table.n_rows - len(kept)
    if table.n_rows and not kept:
        raise AllRowsRemoved(f"{table.name}: all {table.n_rows} rows contain {token!r}")
    if removed:
        logger.info(f"{table.name}: removed {removed} rows with missing values")
    return replace(table, cells=kept, removed_rows=table.removed_rows + removed)


def _numeric_column(column: pd.Series) -> Optional[np.ndarray]:
    if pd.to_numeric(column, errors="coerce").isna().any():
        return None
    # float() parsing keeps 17-digit values bit-exact
    try:
        values = column.astype(float).to_numpy()
    except ValueError:
        return None
    return values if np.all(np.isfinite(values)) else None


def encode_nominal(table: RawTable) -> Dataset:
    """
    Numeric Dataset from a string table

    A column is nominal as soon as one of its cells does not parse as a
    finite number; nominal columns become 0, 1, 2, ... in first-appearance
    order from the top.
    """

    frame = pd.DataFrame(list(table.cells), columns=range(len(table.header)), dtype=object)
    encoded = []
    nominal = []
    for index, column in frame.items():
        values = _numeric_column(column)
        if values is None:
            codes, _ = pd.factorize(column, sort=False)
            values = codes.astype(float)
            nominal.append(table.header[index])
        encoded.append(values)

    if nominal:
        logger.info(f"{table.name}: ordinal-encoded nominal columns {', '.join(nominal)}")

    matrix = np.column_stack(encoded).reshape(len(table.cells), len(table.header))
    feature_indices = [i for i in range(len(table.header)) if i != table.target_index]
    return Dataset(
        X=matrix[:, feature_indices],
        y=matrix[:, table.target_index],
        feature_names=tuple(table.header[i] for i in feature_indices),
        name=table.name,
        removed_rows=table.removed_rows,
    )


# Feature selection

def _abs_correlation(a: np.ndarray, b: np.ndarray) -> float:
    """|Pearson r|, 0 when either side is constant"""
    if np.all(a == a[0]) or np.all(b == b[0]):
        return 0.0
    return min(1.0, abs(float(np.corrcoef(a, b)[0, 1])))


def subset_merit(feature_target: np.ndarray, feature_feature: np.ndarray, subset: Sequence[int]) -> float:
    """k * mean|r_cf| / sqrt(k + k(k-1) * mean|r_ff|)"""
    k = len(subset)
    if k == 0:
        return -math.inf
    r_cf = float(np.mean(feature_target[list(subset)]))
    if k == 1:
        r_ff = 0.0
    else:
        pairs = [feature_feature[i, j] for a, i in enumerate(subset) for j in subset[a + 1:]]
        r_ff = float(np.mean(pairs))
    return k * r_cf / math.sqrt(k + k * (k - 1) * r_ff)


def correlation_tables(dataset: Dataset) -> Tuple[np.ndarray, np.ndarray]:
    m = dataset.m
    feature_target = np.array([_abs_correlation(dataset.X[:, j], dataset.y) for j in range(m)])
    feature_feature = np.eye(m)
    for i in range(m):
        for j in range(i + 1, m):
            feature_feature[i, j] = feature_feature[j, i] = _abs_correlation(dataset.X[:, i], dataset.X[:, j])
    return feature_target, feature_feature


def cfs_select(dataset: Dataset, max_features: Optional[int] = None) -> List[int]:
    """
    Greedy forward correlation-based feature selection

    Adds the candidate with the highest merit (lowest index on ties) while
    the merit strictly improves, up to max_features. Returns sorted indices.
    """

    if not np.any(dataset.y != dataset.y[0]):
        raise ConstantTarget(f"{dataset.name}: feature selection needs a non-constant target")
    if max_features is not None and max_features < 1:
        raise InvalidParameter("max_features must be >= 1")

    feature_target, feature_feature = correlation_tables(dataset)
    limit = dataset.m if max_features is None else min(max_features, dataset.m)
    selected: List[int] = []
    current = -math.inf

    while len(selected) < limit:
        best_index, best_merit = None, -math.inf
        for candidate in range(dataset.m):
            if candidate in selected:
                continue
            merit = subset_merit(feature_target, feature_feature, selected + [candidate])
            if merit > best_merit:
                best_index, best_merit = candidate, merit
        if best_index is None:
            break
        if selected and best_merit <= current + MERIT_TOLERANCE * max(1.0, abs(current)):
            break
        selected.append(best_index)
        current = best_merit

    logger.info(
        f"{dataset.name}: selected {len(selected)} of {dataset.m} regressors "
        f"({', '.join(dataset.feature_names[i] for i in sorted(selected))}), merit {current:.4f}"
    )
    return sorted(selected)


# Canonical numeric CSV

def canonical_csv(dataset: Dataset) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow([f"feature_{j + 1}" for j in range(dataset.m)] + ["target"])
    for row, target in zip(dataset.X, dataset.y):
        writer.writerow([format_float(v) for v in row] + [format_float(target)])
    return buffer.getvalue()


def write_numeric_csv(dataset: Dataset, path: Union[str, Path]) -> Path:
    return write_text(path, canonical_csv(dataset))


def read_numeric_csv(path: Union[str, Path], name: Optional[str] = None) -> Dataset:
    """Inverse of write_numeric_csv (the target is the last column)"""
    table = load_csv(path, target_column=None, missing_token="")
    dataset = encode_nominal(table)
    if name:
        dataset = replace(dataset, name=name)
    return dataset


# Dataset config files

@dataclass(frozen=True)
class DatasetConfig:
    """One `key = value` dataset description"""
    name: str
    path: Path
    target: Optional[str] = None
    missing_token: str = DEFAULT_MISSING_TOKEN
    delimiter: str = ","
    select_features: bool = True


def load_dataset_config(config_path: Union[str, Path]) -> DatasetConfig:
    config_path = Path(config_path)
    entries = read_key_value_file(config_path)
    if "path" not in entries:
        raise ConfigError(f"{config_path}: missing required key 'path'")

    data_path = Path(entries["path"])
    if not data_path.is_absolute():
        data_path = config_path.parent / data_path

    return DatasetConfig(
        name=entries.get("name") or config_path.stem,
        path=data_path,
        target=entries.get("target") or None,
        missing_token=entries.get("missing_token", DEFAULT_MISSING_TOKEN) or DEFAULT_MISSING_TOKEN,
        delimiter=entries.get("delimiter", ",") or ",",
        select_features=parse_bool(entries.get("select_features", "true")),
    )


def prepare_dataset(config: DatasetConfig, max_features: Optional[int] = None) -> Dataset:
    """load_csv -> drop_missing -> encode_nominal -> optional cfs_select"""
    table = drop_missing(load_csv(config.path, config.target, config.missing_token, config.delimiter))
    dataset = replace(encode_nominal(table), name=config.name)

    if config.select_features and max_features != 0 and dataset.m > 1:
        dataset = dataset.select(cfs_select(dataset, max_features))
    return dataset


def dataset_config_for(reference: Union[str, Path]) -> DatasetConfig:
    """A `.conf` file is read as a dataset config; any other path is a CSV with default settings"""
    path = Path(reference)
    if path.suffix == ".conf":
        return load_dataset_config(path)
    return DatasetConfig(name=path.stem, path=path)
