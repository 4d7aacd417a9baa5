"""
    Локальные решения работников, бинарные ответы и слияние

    Публичный API:
        - FusionDecision(decided, tie_count)                      # итог слияния, was_tie - свойство
        - local_decision(true_class, p, m, rng) -> int
        - binary_answer(y, column) -> int                         # u_j = a_{y_j, j}
        - majority_answer(y, group, m) -> int                     # бит group (старший первым) индекса y
        - decode_hamming(a, u, rng) -> FusionDecision             # ничья - случайная строка из argmin
        - decode_majority(m, group_map, u, rng) -> FusionDecision # побитовое большинство, ничья по биту случайна
        - default_group_map(m, n) -> tuple[int, ...]              # непрерывные блоки, старшие биты крупнее

    Пакетные версии для симулятора (по строке на испытание):
        - local_decisions(true_classes, p, m, rng) -> (T, N)
        - coding_answers(a, y) -> (T, N)
        - majority_answers(y, group_map, m) -> (T, N)
        - decode_hamming_batch(a, answers, rng) -> (T,)
        - drop_answers(answers, missing_rate, rng) -> (T, N)          # пропуски с вероятностью missing_rate
        - decode_majority_batch(m, group_map, answers, rng) -> (T,)

    Примечания:
        - Декодеры не знают надёжностей работников (анонимность толпы)
        - Пропущенный ответ (MISSING) одинаково не влияет ни на одну строку
"""

from __future__ import annotations
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from app.codes.codebook import CodeMatrix, decision_profile
from app.core.errors import ValidationError
from app.core.types import MISSING, AnswerVector, as_answer_vector, is_power_of_two


@dataclass(frozen=True)
class FusionDecision:
    decided: int
    tie_count: int

    @property
    def was_tie(self) -> bool:
        return self.tie_count > 1


# =====================================================================
# Работник
# =====================================================================

# Ошибка равновероятна среди остальных M-1 классов
def local_decision(true_class: int, p: float, m: int, rng: np.random.Generator) -> int:
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"Надёжность должна быть в [0, 1], получено {p}")
    if rng.random() < p:
        return int(true_class)
    return int((true_class + rng.integers(1, m)) % m)


def binary_answer(y: int, column: Sequence[int]) -> int:
    return int(column[y])


def _bits_per_class(m: int) -> int:
    if not is_power_of_two(m) or m < 2:
        raise ValidationError(f"Для большинства M должно быть степенью двойки >= 2, получено {m}")
    return m.bit_length() - 1


def majority_answer(y: int, group: int, m: int) -> int:
    b = _bits_per_class(m)
    return int((y >> (b - 1 - group)) & 1)


"""
    Разбиение N работников на log2 M групп подряд идущими блоками.
    Если N не делится на log2 M, лишние работники уходят в старшие биты
"""
def default_group_map(m: int, n: int) -> Tuple[int, ...]:
    b = _bits_per_class(m)
    if n < b:
        raise ValidationError(f"N={n} меньше числа бит log2 M={b}: некоторые группы будут пустыми")
    base, extra = divmod(n, b)
    out = []
    for g in range(b):
        out.extend([g] * (base + (1 if g < extra else 0)))
    return tuple(out)


def _check_group_map(m: int, group_map: Sequence[int], n: int) -> np.ndarray:
    b = _bits_per_class(m)
    gm = np.asarray(group_map, dtype=np.int64).reshape(-1)
    if gm.shape[0] != n:
        raise ValidationError(f"group_map длины {gm.shape[0]}, а работников {n}")
    if gm.size and (gm.min() < 0 or gm.max() >= b):
        raise ValidationError(f"Номера групп должны быть в 0..{b - 1}")
    empty = [g for g in range(b) if not np.any(gm == g)]
    if empty:
        raise ValidationError(f"Пустые группы битов: {empty}")
    return gm


# =====================================================================
# Слияние одного вектора ответов
# =====================================================================

def decode_hamming(a: CodeMatrix, u: AnswerVector, rng: np.random.Generator) -> FusionDecision:
    profile = decision_profile(a, u)
    rows = sorted(profile.argmin_rows)
    decided = rows[0] if len(rows) == 1 else rows[int(rng.integers(len(rows)))]
    return FusionDecision(decided=int(decided), tie_count=profile.tie_count)


def decode_majority(m: int, group_map: Sequence[int], u: AnswerVector, rng: np.random.Generator) -> FusionDecision:
    u = as_answer_vector(u)
    gm = _check_group_map(m, group_map, u.shape[0])
    b = _bits_per_class(m)
    decided = 0
    tied_bits = 0
    for g in range(b):
        votes = u[(gm == g) & (u != MISSING)]
        ones = int(np.count_nonzero(votes == 1))
        zeros = int(votes.size) - ones
        if ones > zeros:
            bit = 1
        elif zeros > ones:
            bit = 0
        else:
            bit = int(rng.integers(2))
            tied_bits += 1
        decided = (decided << 1) | bit
    return FusionDecision(decided=decided, tie_count=1 << tied_bits)


# =====================================================================
# Пакетные версии
# =====================================================================

def local_decisions(true_classes: np.ndarray, p: np.ndarray, m: int, rng: np.random.Generator) -> np.ndarray:
    t, n = p.shape
    correct = rng.random((t, n)) < p
    offset = rng.integers(1, m, size=(t, n))
    truth = np.asarray(true_classes, dtype=np.int64)[:, None]
    return np.where(correct, truth, (truth + offset) % m)


def coding_answers(a: CodeMatrix, y: np.ndarray) -> np.ndarray:
    cols = np.arange(a.num_workers)[None, :]
    return a.bits[y, cols].astype(np.int8)


def majority_answers(y: np.ndarray, group_map: np.ndarray, m: int) -> np.ndarray:
    b = _bits_per_class(m)
    shift = (b - 1 - np.asarray(group_map, dtype=np.int64))
    if shift.ndim == 1:
        shift = shift[None, :]
    return ((y >> shift) & 1).astype(np.int8)


def drop_answers(answers: np.ndarray, missing_rate: float, rng: np.random.Generator) -> np.ndarray:
    if missing_rate <= 0.0:
        return answers
    out = answers.copy()
    out[rng.random(answers.shape) < missing_rate] = MISSING
    return out


def decode_hamming_batch(a: CodeMatrix, answers: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    bits = a.bits.astype(np.int64)
    ones = (answers == 1).astype(np.int64)
    zeros = (answers == 0).astype(np.int64)
    dist = ones @ (1 - bits).T + zeros @ bits.T
    tied = dist == dist.min(axis=1, keepdims=True)

    # Равновероятный выбор среди ближайших строк
    keys = rng.random(dist.shape)
    keys[~tied] = -1.0
    return keys.argmax(axis=1)


def decode_majority_batch(m: int, group_map: np.ndarray, answers: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    b = _bits_per_class(m)
    t, n = answers.shape
    gm = np.asarray(group_map, dtype=np.int64)
    if gm.ndim == 1:
        _check_group_map(m, gm, n)
        gm = np.broadcast_to(gm, (t, n))
    onehot = gm[:, :, None] == np.arange(b)[None, None, :]
    ones = ((answers == 1)[:, :, None] & onehot).sum(axis=1)
    zeros = ((answers == 0)[:, :, None] & onehot).sum(axis=1)
    coin = rng.integers(0, 2, size=(t, b))
    bits = np.where(ones > zeros, 1, np.where(zeros > ones, 0, coin))
    weights = 1 << np.arange(b - 1, -1, -1)
    return bits @ weights


__all__ = [
    "FusionDecision",
    "local_decision",
    "binary_answer",
    "majority_answer",
    "default_group_map",
    "decode_hamming",
    "decode_majority",
    "local_decisions",
    "coding_answers",
    "majority_answers",
    "drop_answers",
    "decode_hamming_batch",
    "decode_majority_batch",
]
