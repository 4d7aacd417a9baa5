"""
    Воспроизводимые потоки случайных чисел для Монте-Карло

    Поток задаётся ключом (seed, chunk, назначение): блок испытаний c всегда
    получает одни и те же числа, как бы блоки ни распределялись по потокам.

    Публичный API:
        - Stream                                  # назначения потоков внутри блока
        - stream(seed, chunk, purpose) -> np.random.Generator
        - chunk_bounds(trials, chunk_size) -> list[(chunk, start, stop)]
        - derive_seed(seed, index) -> int         # seed для независимых прогонов (перезапуски, точки сетки)
"""

from __future__ import annotations
from enum import IntEnum
from typing import List, Tuple

import numpy as np

from app.core.errors import ValidationError


class Stream(IntEnum):

    # Класс, надёжности и локальные решения: общие для кодирования и большинства
    CROWD = 0
    MISSING = 1
    TIES = 2
    PLACEMENT = 3
    FIXED_CROWD = 4


def stream(seed: int, chunk: int, purpose: Stream) -> np.random.Generator:
    if seed < 0:
        raise ValidationError(f"seed должен быть >= 0, получено {seed}")
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(chunk), int(purpose)]))


def chunk_bounds(trials: int, chunk_size: int) -> List[Tuple[int, int, int]]:
    if trials < 1:
        raise ValidationError(f"Число испытаний должно быть >= 1, получено {trials}")
    if chunk_size < 1:
        raise ValidationError(f"chunk_size должен быть >= 1, получено {chunk_size}")
    return [(c, start, min(trials, start + chunk_size)) for c, start in enumerate(range(0, trials, chunk_size))]


def derive_seed(seed: int, index: int) -> int:
    seq = np.random.SeedSequence([int(seed), int(index)])
    return int(seq.generate_state(1, dtype=np.uint32)[0])


__all__ = ["Stream", "stream", "chunk_bounds", "derive_seed"]
