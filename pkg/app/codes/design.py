"""
    Поиск кодовых матриц: имитация отжига и циклическая замена столбцов

    Публичный API:
        - DesignObjective(evaluate, m, n, name, params)     # objective(a) -> P_e в [0, 1]
        - coding_objective(spec, m, n) -> DesignObjective   # точная P_e для CrowdSpec (iid или пары)
        - paired_objective(mu, rho, m, n) -> DesignObjective
        - AnnealSchedule(t0, cooling, moves_per_temperature, t_min, seed, move, balanced)
        - DesignResult(matrix, objective, trace, method, seed, metadata)
        - anneal(m, n, objective, schedule, initial=None, restarts=1, workers=1) -> DesignResult
        - cyclic_column_replacement(a0, objective, balanced=True, max_sweeps=None) -> DesignResult

    Примечания:
        - trace - лучшее значение после каждой эпохи (отжиг) или каждого прохода (замена
          столбцов); оно не возрастает
        - Независимые перезапуски отжига получают seed + k и могут идти в пуле потоков
        - При равенстве кандидатов в замене столбцов остаётся текущий столбец
"""

from __future__ import annotations
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Dict, List, Optional

import math

import numpy as np

from app.analytic.exact import pe_iid_coding, pe_paired_coding
from app.codes.codebook import CodeMatrix, balanced_columns, fingerprint, random_balanced_matrix, to_column_ints
from app.core.config import get_config
from app.core.errors import ValidationError
from app.core.logging import get_logger
from app.crowd.models import CrowdSpec

log = get_logger(__name__)

MOVES = ("flip", "column")


# =====================================================================
# Целевая функция
# =====================================================================

@dataclass(frozen=True)
class DesignObjective:
    evaluate: Callable[[CodeMatrix], float]
    m: int
    n: int
    name: str = "custom"
    params: Dict[str, Any] = field(default_factory=dict)

    def __call__(self, a: CodeMatrix) -> float:
        if a.shape != (self.m, self.n):
            raise ValidationError(f"Матрица {a.shape} не подходит к целевой функции {self.m}x{self.n}")
        return float(self.evaluate(a))


def paired_objective(mu: float, rho: float, m: int, n: int) -> DesignObjective:
    return DesignObjective(
        evaluate=lambda a: pe_paired_coding(a, mu, rho).value,
        m=m,
        n=n,
        name="paired-coding",
        params={"mu": mu, "rho": rho},
    )


# Латентные группы оцениваются через среднее: точная формула не зависит от назначения
def coding_objective(spec: CrowdSpec, m: int, n: int) -> DesignObjective:
    mu = spec.mean
    if spec.variant.paired:
        obj = paired_objective(mu, spec.rho, m, n)
        return replace(obj, params={**obj.params, "crowd": spec.to_dict()})
    return DesignObjective(
        evaluate=lambda a: pe_iid_coding(a, mu).value,
        m=m,
        n=n,
        name="iid-coding",
        params={"mu": mu, "crowd": spec.to_dict()},
    )


# =====================================================================
# Расписание и результат
# =====================================================================

@dataclass(frozen=True)
class AnnealSchedule:
    t0: float = 0.1
    cooling: float = 0.95

    # None -> moves_per_worker * N из конфигурации
    moves_per_temperature: Optional[int] = None
    t_min: float = 1e-4
    seed: int = 0
    move: str = "flip"
    balanced: bool = True

    def __post_init__(self) -> None:
        if not 0.0 < self.cooling < 1.0:
            raise ValidationError(f"Коэффициент охлаждения должен быть в (0, 1), получено {self.cooling}")
        if self.t0 <= 0 or self.t_min <= 0:
            raise ValidationError(f"Температуры должны быть > 0, получено t0={self.t0}, t_min={self.t_min}")
        if self.moves_per_temperature is not None and self.moves_per_temperature < 1:
            raise ValidationError(f"moves_per_temperature должно быть >= 1, получено {self.moves_per_temperature}")
        if self.move not in MOVES:
            raise ValidationError(f"Ход должен быть одним из {MOVES}, получено {self.move!r}")

    @classmethod
    def from_config(cls, seed: int = 0, **overrides: Any) -> "AnnealSchedule":
        cfg = get_config().anneal
        base = dict(t0=cfg.t0, cooling=cfg.cooling, t_min=cfg.t_min, move=cfg.move, balanced=cfg.balanced)
        base.update({k: v for k, v in overrides.items() if v is not None})
        return cls(seed=seed, **base)

    def moves_for(self, n: int) -> int:
        if self.moves_per_temperature is not None:
            return self.moves_per_temperature
        return get_config().anneal.moves_per_worker * n

    def to_dict(self, n: int) -> Dict[str, Any]:
        return {
            "t0": self.t0,
            "cooling": self.cooling,
            "moves_per_temperature": self.moves_for(n),
            "t_min": self.t_min,
            "seed": self.seed,
            "move": self.move,
            "balanced": self.balanced,
        }


@dataclass(frozen=True)
class DesignResult:
    matrix: CodeMatrix
    objective: float
    trace: List[float]
    method: str
    seed: Optional[int] = None
    metadata: Dict[str, Any] = field(default_factory=dict)

    def to_metadata(self) -> Dict[str, Any]:
        doc = {
            "method": self.method,
            "objective": self.objective,
            "fingerprint": fingerprint(self.matrix),
            "trace": list(self.trace),
        }
        if self.seed is not None:
            doc["seed"] = self.seed
        doc.update(self.metadata)
        return doc


# =====================================================================
# Имитация отжига
# =====================================================================

def _column_pool(m: int, balanced: bool) -> np.ndarray:
    cols = balanced_columns(m) if balanced else list(range(1 << m))
    ints = np.asarray(cols, dtype=np.int64)
    return ((ints[None, :] >> np.arange(m, dtype=np.int64)[:, None]) & 1).astype(np.uint8)


def _propose(bits: np.ndarray, schedule: AnnealSchedule, pool: Optional[np.ndarray], rng: np.random.Generator) -> np.ndarray:
    out = bits.copy()
    m, n = bits.shape
    if schedule.move == "flip":
        l, j = int(rng.integers(m)), int(rng.integers(n))
        out[l, j] ^= 1
        return out
    j = int(rng.integers(n))
    k = int(rng.integers(pool.shape[1]))
    out[:, j] = pool[:, k]
    return out


def _anneal_chain(
    m: int,
    n: int,
    objective: DesignObjective,
    schedule: AnnealSchedule,
    initial: Optional[CodeMatrix],
) -> DesignResult:
    rng = np.random.default_rng(schedule.seed)
    start = initial if initial is not None else random_balanced_matrix(m, n, schedule.seed)
    pool = _column_pool(m, schedule.balanced) if schedule.move == "column" else None
    moves = schedule.moves_for(n)

    current = start.bits.copy()
    current_val = objective(start)
    best, best_val = current.copy(), current_val
    trace: List[float] = []

    t = schedule.t0
    epoch = 0
    while t >= schedule.t_min:
        for _ in range(moves):
            proposal = _propose(current, schedule, pool, rng)
            val = objective(CodeMatrix(proposal))
            delta = val - current_val
            if delta <= 0 or rng.random() < math.exp(-delta / t):
                current, current_val = proposal, val
                if val < best_val:
                    best, best_val = proposal.copy(), val
        trace.append(best_val)
        log.debug("Отжиг seed=%d эпоха %d: T=%.3g текущее=%.6g лучшее=%.6g",
                  schedule.seed, epoch, t, current_val, best_val)
        t *= schedule.cooling
        epoch += 1

    return DesignResult(
        matrix=CodeMatrix(best),
        objective=best_val,
        trace=trace,
        method="anneal",
        seed=schedule.seed,
        metadata={"schedule": schedule.to_dict(n), "objective_name": objective.name,
                  "objective_params": objective.params, "initial_objective": objective(start)},
    )


def anneal(
    m: int,
    n: int,
    objective: DesignObjective,
    schedule: AnnealSchedule,
    initial: Optional[CodeMatrix] = None,
    restarts: int = 1,
    workers: int = 1,
) -> DesignResult:
    if (objective.m, objective.n) != (m, n):
        raise ValidationError(f"Целевая функция задана для {objective.m}x{objective.n}, а не {m}x{n}")
    if restarts < 1:
        raise ValidationError(f"restarts должно быть >= 1, получено {restarts}")
    if initial is not None and initial.shape != (m, n):
        raise ValidationError(f"Начальная матрица {initial.shape} не {m}x{n}")

    log.info("Отжиг: M=%d N=%d цель=%s перезапусков=%d seed=%d", m, n, objective.name, restarts, schedule.seed)
    schedules = [replace(schedule, seed=schedule.seed + k) for k in range(restarts)]

    def run(s: AnnealSchedule) -> DesignResult:
        return _anneal_chain(m, n, objective, s, initial)

    if workers > 1 and restarts > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, schedules))
    else:
        results = [run(s) for s in schedules]

    # При равенстве берётся перезапуск с меньшим номером
    best = min(results, key=lambda r: r.objective)
    log.info("Отжиг завершён: P_e=%.6g (seed=%d), столбцы %s", best.objective, best.seed, to_column_ints(best.matrix))
    return replace(best, metadata={**best.metadata, "restarts": restarts, "base_seed": schedule.seed})


# =====================================================================
# Циклическая замена столбцов
# =====================================================================

def cyclic_column_replacement(
    a0: CodeMatrix,
    objective: DesignObjective,
    balanced: Optional[bool] = None,
    max_sweeps: Optional[int] = None,
) -> DesignResult:
    if balanced is None:
        balanced = get_config().anneal.balanced
    m, n = a0.shape
    pool = _column_pool(m, balanced)
    current = a0.bits.copy()
    current_val = objective(a0)
    trace: List[float] = [current_val]

    sweeps = 0
    while max_sweeps is None or sweeps < max_sweeps:
        improved = False
        for j in range(n):
            best_col, best_val = current[:, j].copy(), current_val
            for k in range(pool.shape[1]):
                if np.array_equal(pool[:, k], current[:, j]):
                    continue
                candidate = current.copy()
                candidate[:, j] = pool[:, k]
                val = objective(CodeMatrix(candidate))
                if val < best_val:
                    best_col, best_val = pool[:, k].copy(), val
            if best_val < current_val:
                current[:, j] = best_col
                current_val = best_val
                improved = True
        sweeps += 1
        trace.append(current_val)
        log.debug("Замена столбцов: проход %d, P_e=%.6g", sweeps, current_val)
        if not improved:
            break

    log.info("Замена столбцов завершена за %d проходов: P_e=%.6g", sweeps, current_val)
    return DesignResult(
        matrix=CodeMatrix(current),
        objective=current_val,
        trace=trace,
        method="ccr",
        metadata={"balanced": balanced, "sweeps": sweeps, "objective_name": objective.name,
                  "objective_params": objective.params, "initial_objective": trace[0]},
    )


__all__ = [
    "DesignObjective",
    "coding_objective",
    "paired_objective",
    "AnnealSchedule",
    "DesignResult",
    "anneal",
    "cyclic_column_replacement",
]
