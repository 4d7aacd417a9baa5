"""
    Загрузчик размеченных наборов оценок работников (CSV)

    Формат: заголовок task_id,gold,w1..wN; пустая ячейка - работник не ответил.

    Публичный API:
        - TaskRecord(task_id, gold, values)          # values[j] = None для пропуска
        - load_csv(path, value_max=None) -> list[TaskRecord]
        - save_csv(path, records) -> None

    Примечания:
        - Файл читается в первой подходящей кодировке (utf-8, utf-8-sig, cp1251, latin1)
        - Ошибки формата сообщают номер строки файла (заголовок - строка 1)
"""

from __future__ import annotations
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import csv
import io
import math
import pathlib

from app.core.config import get_config
from app.core.errors import ValidationError
from app.core.logging import get_logger
from app.storage.artifacts import write_csv

log = get_logger(__name__)

_DEF_CODECS: Tuple[str, ...] = ("utf-8", "utf-8-sig", "cp1251", "latin1")


@dataclass(frozen=True)
class TaskRecord:
    task_id: str
    gold: float
    values: Tuple[Optional[float], ...]

    @property
    def num_workers(self) -> int:
        return len(self.values)

    @property
    def num_present(self) -> int:
        return sum(1 for v in self.values if v is not None)


def _read_text_any(path: pathlib.Path, encodings: Iterable[str] = _DEF_CODECS) -> str:
    for enc in encodings:
        try:
            return path.read_text(encoding=enc)
        except UnicodeDecodeError:
            continue
    return path.read_text(encoding="utf-8", errors="ignore")


def _parse_value(cell: str, line: int, column: str, value_max: float) -> Optional[float]:
    token = cell.strip()
    if token == "":
        return None
    try:
        v = float(token)
    except ValueError as e:
        raise ValidationError(f"Строка {line}, столбец {column}: не число {cell!r}") from e
    if math.isnan(v) or not 0.0 <= v <= value_max:
        raise ValidationError(f"Строка {line}, столбец {column}: значение {v} вне диапазона [0, {value_max}]")
    return v


def load_csv(path: str | pathlib.Path, value_max: Optional[float] = None) -> List[TaskRecord]:
    p = pathlib.Path(path)
    if not p.exists():
        raise ValidationError(f"Файл набора не найден: {p}")
    value_max = get_config().dataset.value_max if value_max is None else float(value_max)

    rows = list(csv.reader(io.StringIO(_read_text_any(p).replace("\r\n", "\n"))))
    if not rows:
        raise ValidationError(f"{p}: пустой файл")
    header = [h.strip() for h in rows[0]]
    if len(header) < 3 or header[0] != "task_id" or header[1] != "gold":
        raise ValidationError(f"{p}: заголовок должен быть task_id,gold,w1..wN, получено {','.join(header)}")
    workers = header[2:]

    records: List[TaskRecord] = []
    for line, row in enumerate(rows[1:], start=2):
        if not row or all(c.strip() == "" for c in row):
            continue
        if len(row) != len(header):
            raise ValidationError(f"Строка {line}: {len(row)} ячеек, ожидалось {len(header)}")
        gold = _parse_value(row[1], line, "gold", value_max)
        if gold is None:
            raise ValidationError(f"Строка {line}: нет эталонного значения gold")
        values = tuple(_parse_value(c, line, w, value_max) for c, w in zip(row[2:], workers))
        if all(v is None for v in values):
            raise ValidationError(f"Строка {line}: ни один работник не ответил")
        records.append(TaskRecord(task_id=row[0].strip(), gold=gold, values=values))

    log.info("Загружено %d задач, %d работников из %s", len(records), len(workers), p)
    return records


def save_csv(path: str | pathlib.Path, records: Sequence[TaskRecord]) -> None:
    if not records:
        raise ValidationError("Нечего сохранять: пустой набор")
    n = records[0].num_workers
    header = ["task_id", "gold"] + [f"w{j + 1}" for j in range(n)]
    write_csv(path, header, ([r.task_id, r.gold, *r.values] for r in records))


__all__ = ["TaskRecord", "load_csv", "save_csv"]
