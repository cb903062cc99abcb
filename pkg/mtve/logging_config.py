"""Root logger setup for the mtve command line.

Library modules only ever call ``logging.getLogger(__name__)``; handlers are
installed here, once, by whoever owns the process (the CLI or a test).
"""

import logging
import os
from logging.handlers import RotatingFileHandler
from typing import Optional

from .paths import LOGS

_DEFAULT_LEVEL = os.getenv("MTVE_LOG_LEVEL", "INFO").upper()
LOG_FILE = os.path.join(LOGS, "mtve.log")
_FORMAT = "[%(asctime)s] [%(levelname)s] %(name)s: %(message)s"


def _resolve_level(level: Optional[str]) -> int:
    name = (level or _DEFAULT_LEVEL).upper()
    resolved = logging.getLevelName(name)
    return resolved if isinstance(resolved, int) else logging.INFO


def configure_logging(level: Optional[str] = None, *, log_file: Optional[str] = None, console: bool = True) -> str:
    """Install console + rotating file handlers and return the log path.

    A second call only adjusts the level. Python warnings (for example the
    above-bound coupling warning) are routed into the same handlers.
    """

    desired_level = _resolve_level(level)
    root = logging.getLogger()
    if getattr(configure_logging, "_configured", None):
        root.setLevel(desired_level)
        return configure_logging._configured  # type: ignore[attr-defined]

    target = log_file or LOG_FILE
    os.makedirs(os.path.dirname(target) or ".", exist_ok=True)

    for handler in list(root.handlers):
        root.removeHandler(handler)

    root.setLevel(desired_level)
    formatter = logging.Formatter(_FORMAT)

    if console:
        stream_handler = logging.StreamHandler()
        stream_handler.setFormatter(formatter)
        root.addHandler(stream_handler)

    file_handler = RotatingFileHandler(target, maxBytes=5 * 1024 * 1024, backupCount=3, encoding="utf-8")
    file_handler.setFormatter(formatter)
    root.addHandler(file_handler)
    logging.captureWarnings(True)

    configure_logging._configured = target  # type: ignore[attr-defined]
    root.debug("Logging configured. Log file: %s", target)
    return target


def reset_logging() -> None:
    """Drop installed handlers so the next ``configure_logging`` starts fresh."""

    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)
        handler.close()
    logging.captureWarnings(False)
    configure_logging._configured = None  # type: ignore[attr-defined]


def get_log_file() -> str:
    return getattr(configure_logging, "_configured", None) or LOG_FILE
