"""
    Сравнение слияния кодированием и большинством на размеченном наборе

    Публичный API:
        - EvalReport(name, coding_error, majority_error, tasks, fingerprint, ...)
        - evaluate_dataset(records, a, group_map=None, seed=0, name="dataset") -> EvalReport
        - save_report(report, path, manifest=None) -> None

    Примечания:
        - Пропущенная оценка работника даёт пропущенный бит (кодирование) и
          не участвует в голосовании своей группы (большинство)
        - Ничьи разрешаются генератором с заданным seed, задачи идут по порядку файла
"""

from __future__ import annotations
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import pathlib

import numpy as np

from app.codes.codebook import CodeMatrix, fingerprint
from app.core.config import get_config
from app.core.errors import ValidationError
from app.core.logging import get_logger
from app.core.types import MISSING
from app.data.loaders.csv_loader import TaskRecord
from app.fusion.decision import decode_hamming, decode_majority, default_group_map, majority_answer
from app.processing.quantizer import quantize
from app.storage.artifacts import write_json

log = get_logger(__name__)


@dataclass(frozen=True)
class EvalReport:
    name: str
    coding_error: float
    majority_error: float
    tasks: int
    fingerprint: str
    m: int
    n: int
    seed: int
    group_map: List[int] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "coding_error": self.coding_error,
            "majority_error": self.majority_error,
            "tasks": self.tasks,
            "fingerprint": self.fingerprint,
            "m": self.m,
            "n": self.n,
            "seed": self.seed,
            "group_map": list(self.group_map),
        }


def evaluate_dataset(
    records: Sequence[TaskRecord],
    a: CodeMatrix,
    group_map: Optional[Sequence[int]] = None,
    seed: int = 0,
    name: str = "dataset",
    value_max: Optional[float] = None,
) -> EvalReport:
    if not records:
        raise ValidationError("Пустой набор задач")
    m, n = a.shape
    value_max = get_config().dataset.value_max if value_max is None else float(value_max)
    gm = tuple(group_map) if group_map is not None else default_group_map(m, n)
    rng = np.random.default_rng(seed)

    coding_wrong = 0
    majority_wrong = 0
    for rec in records:
        if rec.num_workers != n:
            raise ValidationError(f"Задача {rec.task_id}: {rec.num_workers} работников, а в матрице {n} столбцов")
        truth = quantize(rec.gold, m, value_max)
        local = [None if v is None else quantize(v, m, value_max) for v in rec.values]

        coded = np.array([MISSING if y is None else a.bits[y, j] for j, y in enumerate(local)], dtype=np.int8)
        voted = np.array([MISSING if y is None else majority_answer(y, gm[j], m) for j, y in enumerate(local)], dtype=np.int8)

        if decode_hamming(a, coded, rng).decided != truth:
            coding_wrong += 1
        if decode_majority(m, gm, voted, rng).decided != truth:
            majority_wrong += 1

    total = len(records)
    report = EvalReport(
        name=name,
        coding_error=coding_wrong / total,
        majority_error=majority_wrong / total,
        tasks=total,
        fingerprint=fingerprint(a),
        m=m,
        n=n,
        seed=seed,
        group_map=list(gm),
    )
    log.info("Набор %s: %d задач, ошибка кодирования %.4f, большинства %.4f",
             name, total, report.coding_error, report.majority_error)
    return report


def save_report(report: EvalReport, path: str | pathlib.Path, manifest: Optional[str] = None) -> None:
    doc = report.to_dict()
    if manifest is not None:
        doc["manifest"] = manifest
    write_json(path, doc)


__all__ = ["EvalReport", "evaluate_dataset", "save_report"]
