"""Logging setup for the dofusion library and command line."""

import logging
import os
import sys
from collections.abc import Iterator
from contextlib import contextmanager
from pathlib import Path

from tqdm.contrib.logging import logging_redirect_tqdm

# Log format with timestamp, module, level, and message
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
LOG_FORMAT_SIMPLE = "%(levelname)s - %(message)s"

LOG_LEVEL_ENV = "DOFUSION_LOG_LEVEL"
PACKAGE_LOGGER = "dofusion"


def level_from_env(default: int = logging.WARNING) -> int:
    """Level named by DOFUSION_LOG_LEVEL, or `default` if unset or unknown."""
    name = os.environ.get(LOG_LEVEL_ENV, "").strip().upper()
    if not name:
        return default
    level = logging.getLevelName(name)
    return level if isinstance(level, int) else default


def verbosity_level(verbose: int) -> int | None:
    """Map a count of -v flags to a level. None defers to the environment."""
    if verbose <= 0:
        return None
    return logging.INFO if verbose == 1 else logging.DEBUG


def setup_logging(
    level: int | None = None,
    log_file: Path | None = None,
    simple_format: bool = False,
) -> logging.Logger:
    """Configure the package logger.

    Reports own stdout, so the console handler writes to stderr.

    Args:
        level: Log level (default: from DOFUSION_LOG_LEVEL or WARNING)
        log_file: Optional file that receives full-format records as well
        simple_format: Drop timestamps and module names on the console

    Returns:
        The "dofusion" logger
    """
    if level is None:
        level = level_from_env()

    logger = logging.getLogger(PACKAGE_LOGGER)
    logger.setLevel(level)
    for handler in logger.handlers:
        handler.close()
    logger.handlers.clear()

    console = logging.StreamHandler(sys.stderr)
    console.setFormatter(logging.Formatter(LOG_FORMAT_SIMPLE if simple_format else LOG_FORMAT))
    logger.addHandler(console)

    if log_file is not None:
        log_file.parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(log_file, encoding="utf-8")
        file_handler.setFormatter(logging.Formatter(LOG_FORMAT))
        logger.addHandler(file_handler)

    logger.propagate = False
    logger.debug("Logging configured (level=%s, file=%s)", logging.getLevelName(level), log_file)
    return logger


@contextmanager
def progress_logging() -> Iterator[None]:
    """Route package log records through tqdm while a progress bar is drawn."""
    with logging_redirect_tqdm(loggers=[logging.getLogger(PACKAGE_LOGGER)]):
        yield
