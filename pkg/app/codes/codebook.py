"""
    Кодовые матрицы M x N и геометрия расстояний Хэмминга

    Строки - кодовые слова классов, столбцы - бинарные вопросы работникам.
    Столбец j кодируется целым r_j = sum_l a_{lj} * 2^l (строка 0 - младший бит).

    Публичный API:
        - CodeMatrix                                        # неизменяемая матрица {0,1}
        - DecisionProfile                                   # результат поиска ближайших строк
        - from_column_ints(cols, m) -> CodeMatrix
        - to_column_ints(a) -> list[int]
        - hamming_distance(u, row) -> int                   # пропуски не учитываются
        - decision_profile(a, u) -> DecisionProfile
        - majority_equivalent_matrix(m, n) -> CodeMatrix
        - random_balanced_matrix(m, n, seed) -> CodeMatrix
        - concatenate(a, times) -> CodeMatrix
        - complement(u) -> AnswerVector
        - duplicate_rows(a) -> list[tuple[int, int]]
        - validate(a) -> list[str]                          # предупреждения, не исключения
        - minimum_row_distance(a) -> int
        - fingerprint(a) -> str
        - load_matrix(path) -> tuple[CodeMatrix, dict]
        - save_matrix(a, path, metadata=None) -> None

    Примечания:
        - Дубликаты строк допустимы: декодирование остаётся определённым через ничьи
        - Все операции чистые, CodeMatrix безопасно разделять между потоками
"""

from __future__ import annotations
from dataclasses import dataclass
from typing import Any, Dict, FrozenSet, List, Optional, Sequence, Tuple

import json
import pathlib

import numpy as np

from app.core.errors import ValidationError
from app.core.logging import get_logger
from app.core.types import MISSING, AnswerVector, as_answer_vector, is_power_of_two
from app.core.utils_hash import sha256_text
from app.storage.artifacts import write_json

log = get_logger(__name__)


# =====================================================================
# Типы
# =====================================================================

@dataclass(frozen=True, eq=False)
class CodeMatrix:
    bits: np.ndarray

    def __post_init__(self) -> None:
        raw = np.asarray(self.bits)
        if raw.ndim != 2:
            raise ValidationError(f"Кодовая матрица должна быть двумерной, получено ndim={raw.ndim}")
        m, n = raw.shape
        if m < 2 or n < 1:
            raise ValidationError(f"Нужно M >= 2 и N >= 1, получено {m}x{n}")
        if not np.isin(raw, (0, 1)).all():
            raise ValidationError("Элементы кодовой матрицы должны быть 0 или 1")
        arr = raw.astype(np.uint8, copy=True)
        arr.setflags(write=False)
        object.__setattr__(self, "bits", arr)

    @property
    def num_classes(self) -> int:
        return int(self.bits.shape[0])

    @property
    def num_workers(self) -> int:
        return int(self.bits.shape[1])

    @property
    def shape(self) -> Tuple[int, int]:
        return self.num_classes, self.num_workers

    def row(self, l: int) -> np.ndarray:
        return self.bits[l]

    def column(self, j: int) -> np.ndarray:
        return self.bits[:, j]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CodeMatrix):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self.bits, other.bits))

    def __hash__(self) -> int:
        return hash((self.shape, self.bits.tobytes()))

    def __repr__(self) -> str:
        return f"CodeMatrix(m={self.num_classes}, columns={to_column_ints(self)})"


@dataclass(frozen=True)
class DecisionProfile:
    min_distance: int
    argmin_rows: FrozenSet[int]

    @property
    def tie_count(self) -> int:
        return len(self.argmin_rows)


# =====================================================================
# Представление столбцами-целыми
# =====================================================================

def from_column_ints(cols: Sequence[int], m: int) -> CodeMatrix:
    if m < 2:
        raise ValidationError(f"Число классов M должно быть >= 2, получено {m}")
    if len(cols) == 0:
        raise ValidationError("Пустой список столбцов")
    limit = 1 << m
    for j, c in enumerate(cols):
        if int(c) < 0 or int(c) >= limit:
            raise ValidationError(f"Столбец {j}: значение {c} вне диапазона [0, 2^{m})")
    col_arr = np.asarray([int(c) for c in cols], dtype=np.int64)
    shifts = np.arange(m, dtype=np.int64)[:, None]
    return CodeMatrix((col_arr[None, :] >> shifts) & 1)


def to_column_ints(a: CodeMatrix) -> List[int]:
    weights = 1 << np.arange(a.num_classes, dtype=np.int64)
    return [int(x) for x in weights @ a.bits.astype(np.int64)]


# =====================================================================
# Расстояния и решения
# =====================================================================

# Пропущенные позиции дают одинаковый вклад 0 во все строки
def hamming_distance(u: AnswerVector, row: Sequence[int]) -> int:
    u = as_answer_vector(u)
    r = np.asarray(row, dtype=np.int8).reshape(-1)
    if u.shape[0] != r.shape[0]:
        raise ValidationError(f"Длины не совпадают: ответы {u.shape[0]}, строка {r.shape[0]}")
    present = u != MISSING
    return int(np.count_nonzero(present & (u != r)))


def row_distances(a: CodeMatrix, u: AnswerVector) -> np.ndarray:
    u = as_answer_vector(u)
    if u.shape[0] != a.num_workers:
        raise ValidationError(f"Длина ответа {u.shape[0]} не равна числу работников {a.num_workers}")
    present = u != MISSING
    diff = (a.bits != u[None, :]) & present[None, :]
    return diff.sum(axis=1).astype(np.int64)


def decision_profile(a: CodeMatrix, u: AnswerVector) -> DecisionProfile:
    d = row_distances(a, u)
    dmin = int(d.min())
    rows = frozenset(int(l) for l in np.flatnonzero(d == dmin))
    return DecisionProfile(min_distance=dmin, argmin_rows=rows)


def complement(u: AnswerVector) -> AnswerVector:
    u = as_answer_vector(u)
    out = u.copy()
    present = u != MISSING
    out[present] = 1 - u[present]
    return out


# =====================================================================
# Построение матриц
# =====================================================================

"""
    Матрица, на которой декодирование Хэмминга повторяет побитовое большинство:
    группа i (по N/log2 M работников) отвечает i-м старшим битом индекса класса
"""
def majority_equivalent_matrix(m: int, n: int) -> CodeMatrix:
    if not is_power_of_two(m) or m < 2:
        raise ValidationError(f"M должно быть степенью двойки >= 2, получено {m}")
    bits_per_class = m.bit_length() - 1
    if n % bits_per_class != 0:
        raise ValidationError(f"N={n} не делится на log2 M={bits_per_class}")
    per_group = n // bits_per_class
    classes = np.arange(m)[:, None]
    groups = np.arange(n) // per_group
    shift = bits_per_class - 1 - groups
    return CodeMatrix((classes >> shift[None, :]) & 1)


# Для нечётного M в столбце ceil(M/2) единиц
def random_balanced_matrix(m: int, n: int, seed: int) -> CodeMatrix:
    if m < 2 or n < 1:
        raise ValidationError(f"Нужно M >= 2 и N >= 1, получено {m}x{n}")
    rng = np.random.default_rng(seed)
    ones = (m + 1) // 2
    base = np.zeros(m, dtype=np.uint8)
    base[:ones] = 1
    cols = [rng.permutation(base) for _ in range(n)]
    return CodeMatrix(np.stack(cols, axis=1))


def concatenate(a: CodeMatrix, times: int) -> CodeMatrix:
    if times < 1:
        raise ValidationError(f"times должно быть >= 1, получено {times}")
    if times == 1:
        return a
    return CodeMatrix(np.tile(a.bits, (1, times)))


def balanced_columns(m: int) -> List[int]:
    ones = (m + 1) // 2
    return [c for c in range(1 << m) if bin(c).count("1") == ones]


# =====================================================================
# Проверки и свойства
# =====================================================================

def duplicate_rows(a: CodeMatrix) -> List[Tuple[int, int]]:
    out: List[Tuple[int, int]] = []
    for i in range(a.num_classes):
        for l in range(i + 1, a.num_classes):
            if np.array_equal(a.bits[i], a.bits[l]):
                out.append((i, l))
    return out


def rows_distinct(a: CodeMatrix) -> bool:
    return not duplicate_rows(a)


def validate(a: CodeMatrix) -> List[str]:
    warnings: List[str] = []
    for i, l in duplicate_rows(a):
        warnings.append(f"строки {i} и {l} совпадают: классы различимы только случайным выбором")
    for msg in warnings:
        log.warning("Кодовая матрица %s: %s", fingerprint(a)[:12], msg)
    return warnings


def minimum_row_distance(a: CodeMatrix) -> int:
    b = a.bits.astype(np.int64)
    d = (b[:, None, :] != b[None, :, :]).sum(axis=2)
    iu = np.triu_indices(a.num_classes, k=1)
    return int(d[iu].min())


def fingerprint(a: CodeMatrix) -> str:
    cols = ",".join(str(c) for c in to_column_ints(a))
    return sha256_text(f"{a.num_classes}:{cols}")


# =====================================================================
# JSON-файл матрицы: {"m": M, "columns": [...], "metadata": {...}}
# =====================================================================

def matrix_to_json(a: CodeMatrix, metadata: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    doc: Dict[str, Any] = {"m": a.num_classes, "columns": to_column_ints(a)}
    if metadata:
        doc["metadata"] = metadata
    return doc


def matrix_from_json(doc: Dict[str, Any]) -> CodeMatrix:
    try:
        m = int(doc["m"])
        cols = [int(c) for c in doc["columns"]]
    except (KeyError, TypeError, ValueError) as e:
        raise ValidationError(f"Файл матрицы должен содержать 'm' и 'columns': {e}") from e
    return from_column_ints(cols, m)


def load_matrix(path: str | pathlib.Path) -> Tuple[CodeMatrix, Dict[str, Any]]:
    p = pathlib.Path(path)
    try:
        doc = json.loads(p.read_text(encoding="utf-8"))
    except FileNotFoundError as e:
        raise ValidationError(f"Файл матрицы не найден: {p}") from e
    except json.JSONDecodeError as e:
        raise ValidationError(f"{p}: некорректный JSON ({e})") from e
    a = matrix_from_json(doc)
    validate(a)
    return a, dict(doc.get("metadata") or {})


def save_matrix(a: CodeMatrix, path: str | pathlib.Path, metadata: Optional[Dict[str, Any]] = None) -> None:
    write_json(path, matrix_to_json(a, metadata))


# Эталонные матрицы для воспроизведения графиков (CLI и тесты)
REFERENCE_M4_N10 = (5, 12, 3, 10, 12, 9, 9, 10, 9, 12)
REFERENCE_M8_N15 = (150, 150, 90, 240, 240, 153, 102, 204, 204, 204, 170, 170, 170, 170, 170)


__all__ = [
    "CodeMatrix",
    "DecisionProfile",
    "from_column_ints",
    "to_column_ints",
    "hamming_distance",
    "row_distances",
    "decision_profile",
    "complement",
    "majority_equivalent_matrix",
    "random_balanced_matrix",
    "concatenate",
    "balanced_columns",
    "duplicate_rows",
    "rows_distinct",
    "validate",
    "minimum_row_distance",
    "fingerprint",
    "matrix_to_json",
    "matrix_from_json",
    "load_matrix",
    "save_matrix",
    "REFERENCE_M4_N10",
    "REFERENCE_M8_N15",
]
