import logging
import os
import sys
from typing import Optional

# Configure logging format
LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def get_logger(name: str, level: Optional[str] = None) -> logging.Logger:
    """Get configured logger writing to stderr (stdout carries JSON reports)"""

    logger = logging.getLogger(name)

    if not logger.handlers:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        logger.addHandler(handler)
        logger.propagate = False

    log_level = level or os.getenv('MONODROME_LOG_LEVEL') or 'INFO'
    logger.setLevel(getattr(logging, log_level.upper()))

    return logger


def set_level(level: str) -> None:
    """Apply a level to every monodrome logger created so far"""

    for candidate in logging.Logger.manager.loggerDict.values():
        if isinstance(candidate, logging.Logger) and candidate.handlers:
            candidate.setLevel(getattr(logging, level.upper()))
