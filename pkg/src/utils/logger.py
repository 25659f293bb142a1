"""
Logger setup for the sparse SFM toolkit.
Provides the shared "sparse_sfm" logger with console output and optional rotating file output.
"""

import logging
import logging.handlers
import os
from pathlib import Path
from typing import Optional

LOGGER_NAME = "sparse_sfm"

FORMATTER = logging.Formatter(
    fmt="%(asctime)s | %(levelname)-8s | %(name)s | %(module)s.%(funcName)s:%(lineno)d | %(message)s",
    datefmt="%Y-%m-%d %H:%M:%S",
)


def _has_file_handler(logger: logging.Logger, log_path: Path) -> bool:
    target = os.path.abspath(str(log_path))
    return any(
        isinstance(handler, logging.handlers.RotatingFileHandler) and handler.baseFilename == target
        for handler in logger.handlers
    )


def setup_logging(log_path: Optional[Path] = None, level: int = logging.INFO) -> logging.Logger:
    """Set up application-wide logging.

    - Console output goes to stderr so reports on stdout stay machine readable
    - When log_path is given, also writes there, rotating at ~5MB with up to 3 backups
    - Includes timestamp, level, module, function, and line number
    - Calling again adjusts the level and adds a missing log file; handlers are never duplicated
    """
    logger = logging.getLogger(LOGGER_NAME)
    logger.setLevel(level)

    if logger.handlers:
        # Already configured
        for handler in logger.handlers:
            handler.setLevel(level)
    else:
        console_handler = logging.StreamHandler()
        console_handler.setFormatter(FORMATTER)
        console_handler.setLevel(level)
        logger.addHandler(console_handler)

    if log_path is not None:
        log_path = Path(log_path)
        if not _has_file_handler(logger, log_path):
            log_path.parent.mkdir(parents=True, exist_ok=True)
            file_handler = logging.handlers.RotatingFileHandler(
                str(log_path), maxBytes=5 * 1024 * 1024, backupCount=3, encoding="utf-8"
            )
            file_handler.setFormatter(FORMATTER)
            file_handler.setLevel(level)
            logger.addHandler(file_handler)
            logger.debug("Logging initialized. Log file: %s", log_path)

    return logger
