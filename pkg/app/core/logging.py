"""
    Настройка логирования

    Публичный API:
        - setup_logging(level: str | int | None = None) -> None
        - get_logger(name: str) -> logging.Logger

    Примечания:
        - Пишем в stderr, чтобы CSV/JSON в stdout оставались чистыми
        - Повторный вызов setup_logging только меняет уровень
"""

from __future__ import annotations
from typing import Optional, Union

import logging
import sys

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
ROOT_LOGGER = "app"

_configured = False


def setup_logging(level: Optional[Union[str, int]] = None) -> None:
    global _configured
    if level is None:
        from app.core.config import get_config
        level = get_config().logging.level
    if isinstance(level, str):
        level = logging.getLevelName(level.upper())
        if not isinstance(level, int):
            level = logging.INFO

    root = logging.getLogger(ROOT_LOGGER)
    if not _configured:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        root.addHandler(handler)
        root.propagate = False
        _configured = True
    root.setLevel(level)


# Логгеры модулей живут под общим корнем 'app'
def get_logger(name: str) -> logging.Logger:
    if not name.startswith(ROOT_LOGGER):
        name = f"{ROOT_LOGGER}.{name}"
    return logging.getLogger(name)


__all__ = ["setup_logging", "get_logger"]
