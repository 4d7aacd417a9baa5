"""
    Общие типы значений

    Публичный API:
        - MISSING: int                                   # маркер отсутствующего ответа (-1)
        - AnswerVector                                   # np.ndarray[int8] со значениями {0, 1, MISSING}
        - as_answer_vector(values) -> AnswerVector       # приводит список/строку к AnswerVector
        - format_answers(u) -> str                       # '01-1' для trace CSV
        - is_power_of_two(x: int) -> bool
"""

from __future__ import annotations
from typing import Iterable, Union

import numpy as np

from app.core.errors import ValidationError

MISSING = -1

AnswerVector = np.ndarray

_MISSING_TOKENS = {"-", "", "none", "nan", "missing"}


def as_answer_vector(values: Union[str, Iterable[object], np.ndarray]) -> AnswerVector:
    if isinstance(values, np.ndarray) and values.dtype.kind in "iub":
        arr = values.astype(np.int8, copy=True).reshape(-1)
    else:
        items = list(values) if not isinstance(values, str) else list(values.strip())
        out = []
        for pos, v in enumerate(items):
            if v is None:
                out.append(MISSING)
                continue
            token = str(v).strip().lower()
            if token in _MISSING_TOKENS:
                out.append(MISSING)
            elif token in ("0", "1"):
                out.append(int(token))
            elif token == str(MISSING):
                out.append(MISSING)
            else:
                raise ValidationError(f"Ответ в позиции {pos} должен быть 0, 1 или '-': {v!r}")
        arr = np.asarray(out, dtype=np.int8)
    bad = ~np.isin(arr, (0, 1, MISSING))
    if bad.any():
        raise ValidationError(f"Недопустимые значения ответа в позициях {np.flatnonzero(bad).tolist()}")
    return arr


def format_answers(u: AnswerVector) -> str:
    return "".join("-" if v == MISSING else str(int(v)) for v in u)


def is_power_of_two(x: int) -> bool:
    return x >= 1 and (x & (x - 1)) == 0


__all__ = ["MISSING", "AnswerVector", "as_answer_vector", "format_answers", "is_power_of_two"]
