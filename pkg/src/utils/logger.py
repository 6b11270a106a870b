"""
Logging for kramers

Handlers live on the package logger "kramers"; every module logger is a
child of it, so one call to KramersLogger.configure re-targets all of them.
Console output goes to stderr.
"""

import logging
import sys
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Optional, Union

ROOT = "kramers"
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"
MAX_LOG_BYTES = 10 * 1024 * 1024
LOG_BACKUPS = 5


def parse_level(level: Union[int, str]) -> int:
    """Level name or number; unknown names fall back to INFO."""
    if isinstance(level, int):
        return level
    return logging.getLevelNamesMapping().get(str(level).upper(), logging.INFO)


class KramersLogger:
    """Owns the handlers of the package logger"""

    _configured = False

    @classmethod
    def configure(
        cls,
        level: Union[int, str] = logging.INFO,
        log_file: Optional[str] = None,
        console: bool = True,
    ) -> logging.Logger:
        """
        Replace the package handlers. Called once by the CLI with the
        settings' level and file; library use gets INFO on stderr.
        """
        root = logging.getLogger(ROOT)
        for handler in list(root.handlers):
            root.removeHandler(handler)
            handler.close()

        formatter = logging.Formatter(fmt=LOG_FORMAT, datefmt=DATE_FORMAT)
        if console:
            stream = logging.StreamHandler(sys.stderr)
            stream.setFormatter(formatter)
            root.addHandler(stream)
        if log_file:
            path = Path(log_file).expanduser().resolve()
            path.parent.mkdir(parents=True, exist_ok=True)
            rotating = RotatingFileHandler(path, maxBytes=MAX_LOG_BYTES, backupCount=LOG_BACKUPS)
            rotating.setFormatter(formatter)
            root.addHandler(rotating)

        root.setLevel(parse_level(level))
        root.propagate = False
        cls._configured = True
        return root


def get_logger(name: str) -> logging.Logger:
    """Module logger under the package logger (pass __name__)."""
    if not KramersLogger._configured:
        KramersLogger.configure()
    if name != ROOT and not name.startswith(ROOT + "."):
        name = f"{ROOT}.{name}"
    return logging.getLogger(name)
