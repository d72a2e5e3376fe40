"""
AMA Controller - the `ama-validate` command

Handles:
- Checkpoint parsing (explicit list or a full 1..m_max sweep)
- The randomized solve/reconstruct validation loop
- The plot-ready ValidationRecord CSV
"""

import argparse
import logging
from pathlib import Path
from typing import List, Optional, Tuple

from .common import EXIT_OK, command, settings_from
from ..core.arithmetic_method import DEFAULT_VALUE_RANGE, ama_validate
from ..core.exceptions import UsageError
from ..models.regression_models import ValidationRecord
from ..utils.file_io import write_csv
from ..utils.seeding import derive_seed


logger = logging.getLogger(__name__)

DEFAULT_CHECKPOINTS = "1,10,1000,100000,1000000"
OUTPUT_NAME = "ama_validation.csv"


def parse_checkpoints(text: str) -> List[int]:
    items = [item.strip() for item in text.split(",") if item.strip()]
    if not items:
        raise UsageError("at least one checkpoint is required")
    try:
        checkpoints = [int(item) for item in items]
    except ValueError:
        raise UsageError(f"checkpoints must be integers, got {text!r}")
    if any(c < 1 for c in checkpoints):
        raise UsageError("checkpoints must be positive")
    return sorted(set(checkpoints))


def parse_value_range(text: str) -> Tuple[float, float]:
    try:
        low, high = (float(part) for part in text.split(","))
    except ValueError:
        raise UsageError(f"value range must be 'low,high', got {text!r}")
    if not low < high:
        raise UsageError(f"empty value range {text!r}")
    return low, high


def register(subparsers, parents: List[argparse.ArgumentParser]) -> None:
    parser = subparsers.add_parser(
        "ama-validate",
        parents=parents,
        help="validate solve/reconstruct of the arithmetic method at growing dimension counts",
    )
    parser.add_argument("--checkpoints", default=None,
                        help=f"comma list of dimension counts (default {DEFAULT_CHECKPOINTS})")
    parser.add_argument("--m-max", type=int, default=None, help="sweep every dimension count 1..m_max instead")
    parser.add_argument("--value-range", default=",".join(str(v) for v in DEFAULT_VALUE_RANGE),
                        help="uniform draw interval 'low,high'")
    parser.add_argument("--literal-index-divisor", action="store_true",
                        help="divide shares by the 1-based index instead of the active count")
    parser.add_argument("--output-file", default=None, help=f"CSV path (default <out>/{OUTPUT_NAME})")
    parser.set_defaults(handler=cmd_ama_validate)


@command("ama-validate")
def cmd_ama_validate(args: argparse.Namespace) -> int:
    settings = settings_from(args)

    m_max: Optional[int] = args.m_max
    checkpoints: Optional[List[int]] = None
    if m_max is not None:
        if args.checkpoints is not None:
            raise UsageError("--checkpoints and --m-max are mutually exclusive")
        if m_max < 1:
            raise UsageError("--m-max must be >= 1")
    else:
        checkpoints = parse_checkpoints(DEFAULT_CHECKPOINTS if args.checkpoints is None else args.checkpoints)

    records = list(
        ama_validate(
            m_max=m_max,
            value_range=parse_value_range(args.value_range),
            seed=derive_seed(settings.seed, "ama-validate"),
            checkpoints=checkpoints,
            literal_index_divisor=args.literal_index_divisor,
            workers=settings.workers,
        )
    )

    path = Path(args.output_file) if args.output_file else settings.output_dir / OUTPUT_NAME
    write_csv(path, ValidationRecord.CSV_HEADER, (record.csv_row() for record in records))

    worst = max(records, key=lambda r: r.eps)
    logger.info(f"AMA validation: {len(records)} records, max eps {worst.eps:.3e}% at i={worst.i}")
    print(f"wrote {len(records)} records to {path} (max eps {worst.eps:.3e}% at i={worst.i})")
    return EXIT_OK
