"""
Logging setup for the AMR toolkit

Handles:
- One stream handler on the package logger
- JSON log lines (python-json-logger) or classic text lines
- Level/format resolution from flags and environment
"""

import logging
import os
import sys
from typing import Optional

from pythonjsonlogger import jsonlogger


PACKAGE_LOGGER = "amr_toolkit"
TEXT_FORMAT = "%(asctime)s %(levelname)s [%(name)s] %(message)s"
JSON_FORMAT = "%(asctime)s %(levelname)s %(name)s %(message)s"


def configure_logging(level: Optional[str] = None, fmt: Optional[str] = None) -> logging.Logger:
    """
    Configure the package logger

    Flag values win over AMR_LOG_LEVEL / AMR_LOG_FORMAT; defaults are INFO and text.
    Calling it twice replaces the handler instead of stacking a second one.
    """

    level_name = (level or os.getenv("AMR_LOG_LEVEL") or "INFO").upper()
    format_name = (fmt or os.getenv("AMR_LOG_FORMAT") or "text").lower()

    logger = logging.getLogger(PACKAGE_LOGGER)
    logger.setLevel(getattr(logging, level_name, logging.INFO))

    for handler in list(logger.handlers):
        logger.removeHandler(handler)

    handler = logging.StreamHandler(sys.stderr)
    if format_name == "json":
        handler.setFormatter(jsonlogger.JsonFormatter(JSON_FORMAT))
    else:
        handler.setFormatter(logging.Formatter(TEXT_FORMAT))

    logger.addHandler(handler)
    logger.propagate = False
    return logger
