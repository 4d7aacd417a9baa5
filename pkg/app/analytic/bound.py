"""
    Верхняя граница Чернова для ошибки декодирования Хэмминга

    Публичный API:
        - q_matrix(a, p) -> np.ndarray (M, N)          # q_ij = P(u_j != a_ij | класс i)
        - BoundReport(value, condition_holds, margins)
        - chernoff_bound(a, p, theta_max=None, xatol=None) -> BoundReport

    Примечания:
        - Условие: для каждой пары l != i сумма (a_lj xor a_ij)(2 q_ij - 1) < 0;
          если оно нарушено, value = None
        - Инфимум по theta ищется на [0, theta_max] (выпуклая функция, метод bounded)
"""

from __future__ import annotations
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence

import math

import numpy as np
from scipy import optimize

from app.codes.codebook import CodeMatrix
from app.core.config import get_config
from app.core.errors import ValidationError
from app.core.logging import get_logger

log = get_logger(__name__)


@dataclass(frozen=True)
class BoundReport:
    value: Optional[float]
    condition_holds: bool

    # margins[i, l] для l != i, на диагонали 0
    margins: np.ndarray

    def to_dict(self) -> Dict[str, Any]:
        m = self.margins.shape[0]
        pairs: List[Dict[str, Any]] = [
            {"i": i, "l": l, "margin": float(self.margins[i, l])}
            for i in range(m) for l in range(m) if l != i
        ]
        return {"value": self.value, "condition_holds": self.condition_holds, "margins": pairs}


def _check_p(a: CodeMatrix, p: Sequence[float] | float) -> np.ndarray:
    p_arr = np.asarray(p, dtype=float)
    if p_arr.ndim == 0:
        p_arr = np.full(a.num_workers, float(p_arr))
    p_arr = p_arr.reshape(-1)
    if p_arr.shape[0] != a.num_workers:
        raise ValidationError(f"Длина p={p_arr.shape[0]} не равна числу работников {a.num_workers}")
    if np.any((p_arr < 0.0) | (p_arr > 1.0)):
        raise ValidationError("Надёжности p_j должны быть в [0, 1]")
    return p_arr


def q_matrix(a: CodeMatrix, p: Sequence[float] | float) -> np.ndarray:
    p_arr = _check_p(a, p)
    bits = a.bits.astype(np.int64)
    ones = bits.sum(axis=0, keepdims=True)
    m = a.num_classes

    # Число строк, у которых в столбце j другой бит, чем у строки i
    differing = np.where(bits == 1, m - ones, ones)
    return (1.0 - p_arr[None, :]) / (m - 1) * differing


def _log_mgf(theta: float, q: np.ndarray) -> float:
    with np.errstate(divide="ignore"):
        terms = np.logaddexp(np.log(q) + theta, np.log1p(-q) - theta)
    return float(terms.sum())


def _pair_exponent(q: np.ndarray, theta_max: float, xatol: float) -> float:
    if q.size == 0:
        return 0.0
    res = optimize.minimize_scalar(
        lambda t: _log_mgf(t, q),
        bounds=(0.0, theta_max),
        method="bounded",
        options={"xatol": xatol},
    )

    # Метод bounded не проверяет концы отрезка
    return min(float(res.fun), _log_mgf(0.0, q), _log_mgf(theta_max, q))


def chernoff_bound(
    a: CodeMatrix,
    p: Sequence[float] | float,
    theta_max: Optional[float] = None,
    xatol: Optional[float] = None,
) -> BoundReport:
    cfg = get_config().bound
    theta_max = cfg.theta_max if theta_max is None else float(theta_max)
    xatol = cfg.xatol if xatol is None else float(xatol)

    q = q_matrix(a, p)
    bits = a.bits.astype(bool)
    m = a.num_classes

    margins = np.zeros((m, m))
    for i in range(m):
        for l in range(m):
            if l != i:
                d = bits[l] ^ bits[i]
                margins[i, l] = float(np.sum(2.0 * q[i, d] - 1.0))

    off_diagonal = ~np.eye(m, dtype=bool)
    holds = bool(np.all(margins[off_diagonal] < 0.0))
    if not holds:
        log.info("Условие границы нарушено: max margin=%.6g", float(margins[off_diagonal].max()))
        return BoundReport(value=None, condition_holds=False, margins=margins)

    terms = []
    for i in range(m):
        for l in range(m):
            if l != i:
                d = bits[l] ^ bits[i]
                terms.append(math.exp(_pair_exponent(q[i, d], theta_max, xatol)))
    value = math.fsum(terms) / m
    return BoundReport(value=value, condition_holds=True, margins=margins)


__all__ = ["BoundReport", "q_matrix", "chernoff_bound"]
