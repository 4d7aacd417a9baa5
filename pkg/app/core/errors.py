"""
    Иерархия исключений проекта

    Публичный API:
        - CrowdCodeError            - базовое исключение
        - ValidationError           - некорректные входные данные (CLI: код выхода 2)
        - ConfigError               - ошибка в config.yaml
        - InfeasibleCovarianceError - ковариация пары недостижима для заданного распределения
        - CapacityError             - превышен предел точного перебора (CLI: код выхода 1)
"""

from __future__ import annotations


class CrowdCodeError(Exception):
    pass


class ValidationError(CrowdCodeError, ValueError):
    pass


class ConfigError(ValidationError):
    pass


class InfeasibleCovarianceError(ValidationError):
    pass


# Точная формула слишком дорогая, нужно Монте-Карло
class CapacityError(CrowdCodeError, RuntimeError):
    pass


__all__ = [
    "CrowdCodeError",
    "ValidationError",
    "ConfigError",
    "InfeasibleCovarianceError",
    "CapacityError",
]
