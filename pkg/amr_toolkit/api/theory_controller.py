"""
Theory Controller - the `theory-check` command

Runs the randomized bound suites and writes their JSON summary; the exit
status is nonzero when any instance violates a property.
"""

import argparse
import json
import logging
from pathlib import Path
from typing import List

from .common import EXIT_FAILURE, EXIT_OK, command, settings_from
from ..core.exceptions import UsageError
from ..core.theory_checks import TheoryChecker
from ..utils.file_io import write_json


logger = logging.getLogger(__name__)

OUTPUT_NAME = "theory_check.json"


def register(subparsers, parents: List[argparse.ArgumentParser]) -> None:
    parser = subparsers.add_parser("theory-check", parents=parents, help="randomized checks of the bound suite")
    parser.add_argument("--trials", type=int, default=100, help="instances per suite")
    parser.add_argument("--output-file", default=None, help=f"JSON path (default <out>/{OUTPUT_NAME})")
    parser.set_defaults(handler=cmd_theory_check)


@command("theory-check")
def cmd_theory_check(args: argparse.Namespace) -> int:
    if args.trials < 1:
        raise UsageError(f"--trials must be >= 1, got {args.trials}")
    settings = settings_from(args)

    report = TheoryChecker(settings.seed, args.trials).run()
    path = Path(args.output_file) if args.output_file else settings.output_dir / OUTPUT_NAME
    write_json(path, report)

    for suite in report.suites:
        print(f"{suite.name:<22} {suite.passed}/{suite.trials}")
        for violation in suite.violations:
            print(f"  violation: {json.dumps(violation, sort_keys=True)}")

    if not report.all_hold:
        logger.error(f"theory-check: violations found, see {path}")
        return EXIT_FAILURE
    print(f"all properties hold ({path})")
    return EXIT_OK
