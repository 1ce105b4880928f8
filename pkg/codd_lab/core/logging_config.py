import logging
import sys
from pathlib import Path

from codd_lab.core.config import get_settings
from codd_lab.core.constants import (
    LOGGER_NAME,
    LOG_FORMAT_DETAILED,
    LOG_FORMAT_CONSOLE,
    LOG_DATE_FORMAT,
)


def _console_handler(level: int) -> logging.Handler:
    handler = logging.StreamHandler(sys.stderr)
    handler.set_name("console")
    handler.setLevel(level)
    handler.setFormatter(logging.Formatter(LOG_FORMAT_CONSOLE, datefmt=LOG_DATE_FORMAT))
    return handler


def _file_handler(path: Path, level: int) -> logging.Handler:
    path.parent.mkdir(parents=True, exist_ok=True)
    handler = logging.FileHandler(path, encoding="utf-8")
    handler.set_name("file")
    handler.setLevel(level)
    handler.setFormatter(logging.Formatter(LOG_FORMAT_DETAILED, datefmt=LOG_DATE_FORMAT))
    return handler


def setup_logging(
    log_file: Path | None = None,
    console_level: int | None = None,
    file_level: int | None = None
) -> logging.Logger:
    """
    Build the `codd_lab` logger.

    Console records go to stderr; stdout carries only the JSON reports
    printed by the CLI. A file handler is added when a log file is given
    or configured.

    Args:
        log_file: Log file path (default: settings.log_file_path)
        console_level: Console level (default: settings.logging.console_level)
        file_level: File level (default: settings.logging.file_level)

    Returns:
        The package logger
    """
    settings = get_settings()
    logger = logging.getLogger(LOGGER_NAME)
    logger.setLevel(logging.DEBUG)

    # handlers are attached once per process
    if logger.handlers:
        return logger

    logger.addHandler(
        _console_handler(console_level or logging.getLevelName(settings.logging.console_level))
    )
    log_file = log_file or settings.log_file_path
    if log_file is not None:
        logger.addHandler(
            _file_handler(log_file, file_level or logging.getLevelName(settings.logging.file_level))
        )
    return logger


def set_console_level(level: str) -> None:
    """Change the console handler level of the package logger."""
    for handler in logging.getLogger(LOGGER_NAME).handlers:
        if handler.get_name() == "console":
            handler.setLevel(level)


def set_log_file(path: Path, level: str | None = None) -> None:
    """Send package records to `path`, replacing any earlier log file."""
    logger = logging.getLogger(LOGGER_NAME)
    for handler in list(logger.handlers):
        if handler.get_name() == "file":
            logger.removeHandler(handler)
            handler.close()
    level = level or get_settings().logging.file_level
    logger.addHandler(_file_handler(path, logging.getLevelName(level)))
