"""
    Квантование оценок [0, value_max] в M классов и синтетические наборы

    Публичный API:
        - quantize(value, m, value_max=100.0) -> int       # floor(value * M / value_max), верх -> M-1
        - planted_dataset(tasks, m, n, p_correct, seed, missing_rate=0.0) -> list[TaskRecord]
"""

from __future__ import annotations
from typing import List

import math

import numpy as np

from app.core.errors import ValidationError
from app.data.loaders.csv_loader import TaskRecord


# Граница интервала относится к верхнему классу
def quantize(value: float, m: int, value_max: float = 100.0) -> int:
    if m < 2:
        raise ValidationError(f"Число классов M должно быть >= 2, получено {m}")
    if math.isnan(value) or not 0.0 <= value <= value_max:
        raise ValidationError(f"Значение {value} вне диапазона [0, {value_max}]")
    return min(m - 1, int(math.floor(value * m / value_max)))


"""
    Посаженная модель: у каждой задачи эталон равномерен на [0, value_max];
    работник с вероятностью p_correct сообщает эталон, иначе равномерное значение
"""
def planted_dataset(
    tasks: int,
    m: int,
    n: int,
    p_correct: float,
    seed: int,
    missing_rate: float = 0.0,
    value_max: float = 100.0,
) -> List[TaskRecord]:
    if tasks < 1 or n < 1 or m < 2:
        raise ValidationError(f"Нужно tasks >= 1, n >= 1, M >= 2, получено {tasks}, {n}, {m}")
    if not 0.0 <= p_correct <= 1.0:
        raise ValidationError(f"p_correct должно быть в [0, 1], получено {p_correct}")
    if not 0.0 <= missing_rate < 1.0:
        raise ValidationError(f"missing_rate должен быть в [0, 1), получено {missing_rate}")

    rng = np.random.default_rng(seed)
    gold = np.round(rng.uniform(0.0, value_max, size=tasks), 2)
    noise = np.round(rng.uniform(0.0, value_max, size=(tasks, n)), 2)
    correct = rng.random((tasks, n)) < p_correct
    values = np.where(correct, gold[:, None], noise)
    missing = rng.random((tasks, n)) < missing_rate

    # Хотя бы один ответ на задачу
    missing[missing.all(axis=1), 0] = False

    records: List[TaskRecord] = []
    for t in range(tasks):
        row = tuple(None if missing[t, j] else float(values[t, j]) for j in range(n))
        records.append(TaskRecord(task_id=f"t{t + 1:05d}", gold=float(gold[t]), values=row))
    return records


__all__ = ["quantize", "planted_dataset"]
