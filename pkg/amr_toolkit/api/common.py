"""
Shared controller plumbing

Handles:
- Global flags every subcommand accepts (before or after the command name)
- Settings resolution from those flags
- Exception to ErrorReport conversion and exit status mapping
"""

import argparse
import functools
import logging
import sys
from typing import Callable

from ..core.exceptions import AmrToolkitError, ConfigError, UsageError
from ..models.regression_models import ErrorReport
from ..utils.config import CommandSettings, resolve_settings


logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

Handler = Callable[[argparse.Namespace], int]


def global_flags() -> argparse.ArgumentParser:
    """Parent parser for the global flags; SUPPRESS keeps a flag given before the command"""
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="root random seed")
    parser.add_argument("--out", default=argparse.SUPPRESS, help="output directory")
    parser.add_argument("--config", default=argparse.SUPPRESS, help="key = value run config file")
    parser.add_argument("--workers", type=int, default=argparse.SUPPRESS, help="thread pool size")
    parser.add_argument("--n-perm", type=int, default=argparse.SUPPRESS, help="Monte Carlo permutations")
    parser.add_argument("--log-level", default=argparse.SUPPRESS, help="DEBUG, INFO, WARNING or ERROR")
    parser.add_argument("--log-format", choices=["text", "json"], default=argparse.SUPPRESS)
    return parser


def settings_from(args: argparse.Namespace) -> CommandSettings:
    return resolve_settings(
        seed=getattr(args, "seed", None),
        output_dir=getattr(args, "out", None),
        workers=getattr(args, "workers", None),
        n_perm=getattr(args, "n_perm", None),
        config_path=getattr(args, "config", None),
    )


def exit_status(error: BaseException) -> int:
    if isinstance(error, (UsageError, ConfigError)):
        return EXIT_USAGE
    return EXIT_FAILURE


def error_report(error: BaseException) -> ErrorReport:
    details = None
    if isinstance(error, AmrToolkitError) and error.fold_index is not None:
        details = f"fold {error.fold_index}"
    return ErrorReport(
        error=str(error) or type(error).__name__,
        error_code=getattr(error, "error_code", type(error).__name__.upper()),
        details=details,
    )


def command(name: str) -> Callable[[Handler], Handler]:
    """Run a handler, turning any exception into a logged ErrorReport and an exit status"""

    def decorate(handler: Handler) -> Handler:
        @functools.wraps(handler)
        def wrapper(args: argparse.Namespace) -> int:
            try:
                return handler(args)
            except (AmrToolkitError, OSError) as error:
                report = error_report(error)
                logger.error(f"{name} failed: {report.model_dump_json()}")
                print(f"error: {report.error}", file=sys.stderr)
                return exit_status(error)
            except Exception as error:
                logger.exception(f"{name} failed unexpectedly: {error}")
                print(f"error: {error}", file=sys.stderr)
                return EXIT_FAILURE

        return wrapper

    return decorate
