"""
AMR toolkit command-line application

Arithmetic Method Regression: the equal-share solver, the hybrid
AMA + k-NN regressor, its baselines, LOOCV evaluation with paired
permutation tests, and randomized checks of the supporting bounds.

Every command is reproducible under a fixed root seed.
"""

import argparse
import logging
import sys
from typing import List, Optional

from . import __version__
from .api import ama_controller, evaluation_controller, theory_controller
from .api.common import EXIT_USAGE, global_flags
from .utils.config import load_environment
from .utils.logging_config import configure_logging


logger = logging.getLogger(__name__)

CONTROLLERS = (ama_controller, evaluation_controller, theory_controller)


def build_parser() -> argparse.ArgumentParser:
    """Main parser with one sub-router per controller"""
    flags = global_flags()
    parser = argparse.ArgumentParser(
        prog="amr-toolkit",
        description="Arithmetic Method Regression toolkit",
        parents=[flags],
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")

    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND")
    subparsers.required = True
    for controller in CONTROLLERS:
        controller.register(subparsers, [flags])
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    load_environment()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exit_request:
        # argparse exits 0 for --help/--version and 2 for usage errors
        code = exit_request.code
        return code if isinstance(code, int) else EXIT_USAGE

    configure_logging(getattr(args, "log_level", None), getattr(args, "log_format", None))
    logger.info(f"{args.command} started")
    status = args.handler(args)
    logger.info(f"{args.command} finished with exit status {status}")
    return status


if __name__ == "__main__":
    sys.exit(main())
