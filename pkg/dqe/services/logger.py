#!/usr/bin/env python3

"""
Logger - log_* style logging facade for DQE services
Wraps the logging package so every module can keep a module-level `log` object
"""

import logging
from typing import Optional


LOG_FORMAT = '%(asctime)s - %(levelname)s - %(name)s - %(message)s'


class Logger:
    """
    Named logger exposing log_debug / log_info / log_warn / log_error.

    Library modules create one instance at import time; handlers are only
    configured by the command line entry point.
    """

    def __init__(self, name: str):
        self.name = name if name.startswith('dqe') else f"dqe.{name}"
        self._logger = logging.getLogger(self.name)

    def log_debug(self, msg: str):
        self._logger.debug(msg)

    def log_info(self, msg: str):
        self._logger.info(msg)

    def log_warn(self, msg: str):
        self._logger.warning(msg)

    def log_error(self, msg: str):
        self._logger.error(msg)

    def is_debug_enabled(self) -> bool:
        return self._logger.isEnabledFor(logging.DEBUG)


def configure_logging(level: str = 'INFO', log_file: Optional[str] = None):
    """Install the root handler for the dqe namespace (CLI only)"""
    numeric = getattr(logging, level.upper(), None)
    if not isinstance(numeric, int):
        raise ValueError(f"Unknown log level: {level}")

    root = logging.getLogger('dqe')
    root.setLevel(numeric)
    for handler in list(root.handlers):
        root.removeHandler(handler)

    handler: logging.Handler = logging.FileHandler(log_file) if log_file else logging.StreamHandler()
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    root.addHandler(handler)
    root.propagate = False
