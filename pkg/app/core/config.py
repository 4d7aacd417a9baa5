"""
    Конфигурация приложения (app/config.yaml)

    Публичный API:
        - AppConfig и секции ExactConfig, AnnealConfig, MonteCarloConfig,
          BoundConfig, CrowdConfig, DatasetConfig, LoggingConfig
        - load_config(path: str | None = None) -> AppConfig
        - get_config() -> AppConfig                  # кэшированная конфигурация по умолчанию
        - reset_config_cache() -> None
        - set_config_path(path) -> None             # путь из флага --config

    Примечания:
        - Путь можно переопределить переменной окружения CROWDCODE_CONFIG
        - Неизвестные ключи считаются ошибкой (опечатки не проходят молча)
"""

from __future__ import annotations
from dataclasses import dataclass, field, fields
from functools import lru_cache
from typing import Any, Dict, Optional, Type, TypeVar

import os
import pathlib

import yaml

from app.core.errors import ConfigError

ROOT = pathlib.Path(__file__).resolve().parents[1]
DEFAULT_CONFIG_PATH = ROOT / "config.yaml"
ENV_VAR = "CROWDCODE_CONFIG"

T = TypeVar("T")


# =====================================================================
# Секции
# =====================================================================

@dataclass(frozen=True)
class ExactConfig:

    # Предел N для перебора 2^N принятых векторов
    max_exact_workers: int = 22

    # Пределы для формул с латентными группами
    max_grouped_workers: int = 8
    max_grouped_truncation: int = 3

    # Сколько принятых векторов обрабатывать за один блок
    block_size: int = 16384


@dataclass(frozen=True)
class AnnealConfig:
    t0: float = 0.1
    cooling: float = 0.95

    # Ходов на одну температуру = moves_per_worker * N
    moves_per_worker: int = 50
    t_min: float = 1e-4

    # 'flip': инверсия одного бита, 'column': замена столбца
    move: str = "flip"

    # Ограничить столбцы сбалансированными (ceil(M/2) единиц)
    balanced: bool = True
    restarts: int = 1


@dataclass(frozen=True)
class MonteCarloConfig:
    trials: int = 100_000
    chunk_size: int = 4096
    workers: int = 1
    trace_limit: int = 1000


@dataclass(frozen=True)
class BoundConfig:
    theta_max: float = 50.0
    xatol: float = 1e-9


@dataclass(frozen=True)
class CrowdConfig:
    reliability_clip: float = 1e-6
    quadrature_nodes: int = 96


@dataclass(frozen=True)
class DatasetConfig:
    num_classes: int = 8
    value_max: float = 100.0


@dataclass(frozen=True)
class LoggingConfig:
    level: str = "INFO"


@dataclass(frozen=True)
class AppConfig:
    exact: ExactConfig = field(default_factory=ExactConfig)
    anneal: AnnealConfig = field(default_factory=AnnealConfig)
    monte_carlo: MonteCarloConfig = field(default_factory=MonteCarloConfig)
    bound: BoundConfig = field(default_factory=BoundConfig)
    crowd: CrowdConfig = field(default_factory=CrowdConfig)
    dataset: DatasetConfig = field(default_factory=DatasetConfig)
    logging: LoggingConfig = field(default_factory=LoggingConfig)


# =====================================================================
# Загрузка
# =====================================================================

def _build_section(cls: Type[T], raw: Any, name: str) -> T:
    if raw is None:
        return cls()
    if not isinstance(raw, dict):
        raise ConfigError(f"Секция '{name}' должна быть словарём")
    known = {f.name: f for f in fields(cls)}
    unknown = sorted(set(raw) - set(known))
    if unknown:
        raise ConfigError(f"Неизвестные ключи в секции '{name}': {', '.join(unknown)}")
    values: Dict[str, Any] = {}
    for key, value in raw.items():
        default = getattr(cls(), key)

        # YAML может отдать 1e-4 строкой, если нет точки в мантиссе
        try:
            if isinstance(default, bool):
                values[key] = bool(value)
            elif isinstance(default, int):
                values[key] = int(value)
            elif isinstance(default, float):
                values[key] = float(value)
            else:
                values[key] = value
        except (TypeError, ValueError) as e:
            raise ConfigError(f"Некорректное значение {name}.{key}: {value!r}") from e
    return cls(**values)


def load_config(path: Optional[str | pathlib.Path] = None) -> AppConfig:
    cfg_path = pathlib.Path(path or os.environ.get(ENV_VAR) or DEFAULT_CONFIG_PATH)
    if not cfg_path.exists():
        raise ConfigError(f"Файл конфигурации не найден: {cfg_path}")
    try:
        raw = yaml.safe_load(cfg_path.read_text(encoding="utf-8")) or {}
    except yaml.YAMLError as e:
        raise ConfigError(f"Не удалось разобрать {cfg_path}: {e}") from e
    if not isinstance(raw, dict):
        raise ConfigError(f"{cfg_path}: ожидается словарь верхнего уровня")

    sections = {f.name: f.default_factory for f in fields(AppConfig)}  # type: ignore[misc]
    unknown = sorted(set(raw) - set(sections))
    if unknown:
        raise ConfigError(f"Неизвестные секции конфигурации: {', '.join(unknown)}")

    built = {name: _build_section(factory, raw.get(name), name) for name, factory in sections.items()}
    return AppConfig(**built)


_override_path: Optional[pathlib.Path] = None


@lru_cache(maxsize=1)
def get_config() -> AppConfig:
    return load_config(_override_path)


def reset_config_cache() -> None:
    get_config.cache_clear()


# Флаг --config: все последующие get_config() читают этот файл
def set_config_path(path: Optional[str | pathlib.Path]) -> None:
    global _override_path
    _override_path = pathlib.Path(path) if path else None
    reset_config_cache()


__all__ = [
    "AppConfig",
    "ExactConfig",
    "AnnealConfig",
    "MonteCarloConfig",
    "BoundConfig",
    "CrowdConfig",
    "DatasetConfig",
    "LoggingConfig",
    "load_config",
    "get_config",
    "reset_config_cache",
    "set_config_path",
]
