"""
    Перебор параметра толпы: MC-оценки, точные значения и граница на каждой точке сетки

    Публичный API:
        - AXES                                        # p | q | alpha | beta | rho_corr | kappa
        - SweepSpec                                   # базовая конфигурация перебора
        - SweepRow(param, pe_code_mc, se_code, pe_maj_mc, se_maj, pe_code_exact, pe_maj_exact, bound)
        - crowd_at(crowd, axis, value, m) -> CrowdSpec
        - sweep(spec, axis, grid) -> list[SweepRow]
        - exact_coding(a, crowd) / exact_majority(m, n, crowd, group_map, placement) -> float | None
        - write_sweep(path, rows) / render_sweep(rows)

    Примечания:
        - Все точки сетки используют один seed: общие случайные числа делают
          тренды по сетке менее шумными
        - Точные значения подставляются только там, где есть формула и позволяют пределы;
          иначе в CSV пустая ячейка
"""

from __future__ import annotations
from dataclasses import dataclass, replace
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import pathlib

from app.analytic.bound import chernoff_bound
from app.analytic.exact import coding_report, majority_report
from app.codes.codebook import CodeMatrix
from app.core.errors import CapacityError, ValidationError
from app.core.logging import get_logger
from app.crowd.models import (
    BetaReliability,
    CrowdSpec,
    SpammerHammer,
    Variant,
    covariance_from_correlation,
)
from app.sim.engine import Placement, Resample, Rule, SimConfig, run_mc
from app.storage.artifacts import render_csv, write_csv

log = get_logger(__name__)

AXES = ("p", "q", "alpha", "beta", "rho_corr", "kappa")

SWEEP_HEADER = ("param", "pe_code_mc", "se_code", "pe_maj_mc", "se_maj", "pe_code_exact", "pe_maj_exact", "bound")


@dataclass(frozen=True)
class SweepRow:
    param: float
    pe_code_mc: Optional[float] = None
    se_code: Optional[float] = None
    pe_maj_mc: Optional[float] = None
    se_maj: Optional[float] = None
    pe_code_exact: Optional[float] = None
    pe_maj_exact: Optional[float] = None
    bound: Optional[float] = None

    def as_tuple(self) -> Tuple[Any, ...]:
        return tuple(getattr(self, name) for name in SWEEP_HEADER)


@dataclass(frozen=True)
class SweepSpec:
    m: int
    n: int
    crowd: CrowdSpec

    # None: столбцы кодирования пустые
    matrix: Optional[CodeMatrix] = None
    majority: bool = True

    # 0: только точные значения
    trials: int = 0
    seed: int = 0
    exact: bool = True
    bound: bool = False

    group_map: Optional[Tuple[int, ...]] = None
    placement: Placement = Placement.SAME_GROUP
    resample: Resample = Resample.PER_TRIAL
    missing_rate: float = 0.0
    chunk_size: Optional[int] = None
    workers: Optional[int] = None

    def __post_init__(self) -> None:
        if self.matrix is not None and self.matrix.shape != (self.m, self.n):
            raise ValidationError(f"Матрица {self.matrix.shape} не совпадает с M={self.m}, N={self.n}")
        if self.trials < 0:
            raise ValidationError(f"trials должно быть >= 0, получено {self.trials}")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "m": self.m,
            "n": self.n,
            "crowd": self.crowd.to_dict(),
            "majority": self.majority,
            "trials": self.trials,
            "seed": self.seed,
            "placement": self.placement.value,
            "resample": self.resample.value,
            "missing_rate": self.missing_rate,
        }


# =====================================================================
# Ось перебора -> CrowdSpec
# =====================================================================

def crowd_at(crowd: CrowdSpec, axis: str, value: float, m: int) -> CrowdSpec:
    dist = crowd.dist
    if axis == "p":
        return replace(crowd, dist=SpammerHammer(quality=1.0, p_spammer=1.0 / m, p_hammer=value), rho=0.0)
    if axis == "q":
        if not isinstance(dist, SpammerHammer):
            raise ValidationError("Ось q требует модель spammer-hammer")
        return replace(crowd, dist=replace(dist, quality=value), rho=_rescaled_rho(crowd, replace(dist, quality=value)))
    if axis in ("alpha", "beta"):
        if not isinstance(dist, BetaReliability):
            raise ValidationError(f"Ось {axis} требует модель beta")
        new = replace(dist, **{axis: value})
        return replace(crowd, dist=new, rho=_rescaled_rho(crowd, new))
    if axis == "rho_corr":
        if not crowd.variant.paired:
            raise ValidationError("Ось rho_corr требует парный вариант толпы")
        return replace(crowd, rho=covariance_from_correlation(dist, value))
    if axis == "kappa":
        if not crowd.variant.grouped:
            raise ValidationError("Ось kappa требует вариант с латентными группами")
        return replace(crowd, kappa=value)
    raise ValidationError(f"Неизвестная ось {axis!r}, допустимы {AXES}")


# При смене распределения сохраняется коэффициент корреляции пары
def _rescaled_rho(crowd: CrowdSpec, dist) -> float:
    if not crowd.variant.paired:
        return 0.0
    return covariance_from_correlation(dist, crowd.rho_corr)


# =====================================================================
# Точные значения
# =====================================================================

def exact_coding(a: CodeMatrix, crowd: CrowdSpec) -> Optional[float]:
    if crowd.variant.grouped and crowd.truncation is None:
        return None
    try:
        return coding_report(a, crowd).value
    except CapacityError as e:
        log.debug("Точное значение кодирования пропущено: %s", e)
        return None


def exact_majority(
    m: int,
    n: int,
    crowd: CrowdSpec,
    group_map: Optional[Sequence[int]] = None,
    placement: Placement = Placement.SAME_GROUP,
) -> Optional[float]:
    # Формула для пар предполагает, что партнёры отвечают про один бит
    if crowd.variant.grouped or (crowd.variant.paired and placement != Placement.SAME_GROUP):
        return None
    try:
        return majority_report(m, n, crowd, group_map).value
    except ValidationError as e:
        log.debug("Точное значение большинства пропущено: %s", e)
        return None


# =====================================================================
# Перебор
# =====================================================================

def _mc(spec: SweepSpec, crowd: CrowdSpec, rule: Rule) -> Tuple[float, float]:
    cfg = SimConfig(
        m=spec.m,
        crowd=crowd,
        trials=spec.trials,
        seed=spec.seed,
        rule=rule,
        matrix=spec.matrix if rule == Rule.CODING else None,
        n=spec.n,
        group_map=spec.group_map if rule == Rule.MAJORITY else None,
        resample=spec.resample,
        placement=spec.placement,
        missing_rate=spec.missing_rate,
        chunk_size=spec.chunk_size,
        workers=spec.workers,
    )
    est = run_mc(cfg)
    return est.estimate, est.stderr


def sweep_point(spec: SweepSpec, axis: str, value: float) -> SweepRow:
    crowd = crowd_at(spec.crowd, axis, value, spec.m)
    row: Dict[str, Any] = {"param": float(value)}

    if spec.matrix is not None:
        if spec.trials > 0:
            row["pe_code_mc"], row["se_code"] = _mc(spec, crowd, Rule.CODING)
        if spec.exact and spec.missing_rate == 0.0:
            row["pe_code_exact"] = exact_coding(spec.matrix, crowd)
        if spec.bound and crowd.variant == Variant.IID:
            report = chernoff_bound(spec.matrix, crowd.mean)
            row["bound"] = report.value

    if spec.majority:
        if spec.trials > 0:
            row["pe_maj_mc"], row["se_maj"] = _mc(spec, crowd, Rule.MAJORITY)
        if spec.exact and spec.missing_rate == 0.0:
            row["pe_maj_exact"] = exact_majority(spec.m, spec.n, crowd, spec.group_map, spec.placement)

    return SweepRow(**row)


def sweep(spec: SweepSpec, axis: str, grid: Iterable[float]) -> List[SweepRow]:
    values = [float(v) for v in grid]
    if not values:
        raise ValidationError("Пустая сетка параметра")
    if axis not in AXES:
        raise ValidationError(f"Неизвестная ось {axis!r}, допустимы {AXES}")
    log.info("Перебор %s по %d точкам: M=%d N=%d испытаний=%d", axis, len(values), spec.m, spec.n, spec.trials)
    return [sweep_point(spec, axis, v) for v in values]


def render_sweep(rows: Iterable[SweepRow]) -> str:
    return render_csv(SWEEP_HEADER, (r.as_tuple() for r in rows))


def write_sweep(path: str | pathlib.Path, rows: Iterable[SweepRow]) -> None:
    write_csv(path, SWEEP_HEADER, (r.as_tuple() for r in rows))


__all__ = [
    "AXES",
    "SWEEP_HEADER",
    "SweepRow",
    "SweepSpec",
    "crowd_at",
    "exact_coding",
    "exact_majority",
    "sweep_point",
    "sweep",
    "render_sweep",
    "write_sweep",
]
