"""Centralized logging configuration for mera-kit."""

import logging
import sys
from logging.handlers import RotatingFileHandler
from pathlib import Path

LOGGER_NAME = "mera_kit"

# Global logger instance
_logger: logging.Logger | None = None


def setup_logging(log_level: int = logging.INFO, log_file: Path | None = None) -> None:
    """Set up logging configuration.

    Reports go to stdout, so console logging goes to stderr.

    Args:
        log_level: Logging level for the package logger
        log_file: Optional path of a rotating log file
    """
    handlers: list[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if log_file is not None:
        log_file.parent.mkdir(parents=True, exist_ok=True)
        handlers.append(
            RotatingFileHandler(
                log_file,
                mode="a",
                encoding="utf-8",
                maxBytes=50 * 1024,  # 50KB
                backupCount=5,
            )
        )

    logging.basicConfig(
        level=log_level,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        handlers=handlers,
        force=True,
    )

    # Set up the global logger
    global _logger  # noqa
    _logger = logging.getLogger(LOGGER_NAME)
    _logger.setLevel(log_level)


def get_logger() -> logging.Logger:
    """Get the package logger.

    Library callers that never ran setup_logging() get the plain, unconfigured logger.

    Returns:
        The configured logger instance
    """
    if _logger is None:
        return logging.getLogger(LOGGER_NAME)
    return _logger
