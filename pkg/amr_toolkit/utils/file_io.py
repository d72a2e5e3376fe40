"""
Result file writers and readers

Handles:
- CSV and JSON output with a write-then-rename step
- Retry of transient OSErrors (tenacity, 3 attempts)
- Number formatting that round-trips floats exactly
- Header-row CSV tables read back through pandas
"""

import csv
import io
import json
import logging
import os
from pathlib import Path
from typing import Any, Iterable, Sequence, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel
from tenacity import retry, retry_if_exception_type, stop_after_attempt, wait_fixed

from ..core.exceptions import ParseError


logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

write_retry = retry(
    retry=retry_if_exception_type(OSError),
    stop=stop_after_attempt(3),
    wait=wait_fixed(0.2),
    reraise=True,
)


def format_float(value: float) -> str:
    """17 significant digits: enough to read back the identical double"""
    return format(float(value), ".17g")


@write_retry
def write_text(path: PathLike, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    staging = path.with_name(path.name + ".tmp")
    with open(staging, "w", encoding="utf-8", newline="") as handle:
        handle.write(text)
    os.replace(staging, path)
    logger.debug(f"wrote {path}")
    return path


def write_csv(path: PathLike, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(row)
    return write_text(path, buffer.getvalue())


def write_json(path: PathLike, payload: Union[BaseModel, Any]) -> Path:
    if isinstance(payload, BaseModel):
        text = payload.model_dump_json(indent=2)
    else:
        text = json.dumps(payload, indent=2, sort_keys=True, default=str)
    return write_text(path, text + "\n")


def read_table(path: PathLike, required: Sequence[str]) -> pd.DataFrame:
    """Header-row CSV of string cells holding at least the required columns"""
    path = Path(path)
    try:
        frame = pd.read_csv(path, encoding="utf-8-sig", dtype=str, skipinitialspace=True)
    except pd.errors.EmptyDataError:
        raise ParseError(f"{path.name}: empty file")
    except pd.errors.ParserError as error:
        raise ParseError(f"{path.name}: {error}")

    frame.columns = [str(column).strip() for column in frame.columns]
    if not set(required) <= set(frame.columns):
        raise ParseError(f"{path.name}: expected columns {','.join(required)}")
    return frame


def numeric_column(frame: pd.DataFrame, column: str, source: str) -> np.ndarray:
    text = frame[column]
    bad = pd.to_numeric(text, errors="coerce").isna().to_numpy()
    if bad.any():
        raise ParseError(f"{source}: non-numeric {column} in data row {int(np.argmax(bad)) + 1}")
    # float() parsing keeps 17-digit values bit-exact
    try:
        values = text.astype(float).to_numpy()
    except ValueError as error:
        raise ParseError(f"{source}: {column}: {error}")
    if not np.all(np.isfinite(values)):
        raise ParseError(f"{source}: non-finite {column}")
    return values


def index_column(frame: pd.DataFrame, column: str, source: str) -> np.ndarray:
    values = numeric_column(frame, column, source)
    if not np.array_equal(values, np.floor(values)):
        raise ParseError(f"{source}: {column} must hold integers")
    return values.astype(int)
