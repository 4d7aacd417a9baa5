"""
    Монте-Карло: сквозные испытания «класс -> надёжности -> решения -> ответы -> слияние»

    Публичный API:
        - Rule                                   # CODING | MAJORITY
        - Resample                               # PER_TRIAL | FIXED
        - Placement                              # SAME_GROUP | INDEPENDENT
        - SimConfig                              # всё, что определяет прогон
        - McEstimate(estimate, stderr, errors, trials, ties, trace)
        - run_mc(config, trace=False) -> McEstimate
        - write_trace(path, estimate) -> None    # CSV: trial, true_class, answers, decoded

    Примечания:
        - Испытания идут блоками по chunk_size; блок c использует потоки (seed, c, ·),
          поэтому последовательный и параллельный прогоны дают одинаковый результат
        - Кодирование и большинство с одним seed видят одни и те же классы,
          надёжности и локальные решения (общие случайные числа)
        - Классы равновероятны
"""

from __future__ import annotations
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import math
import pathlib

import numpy as np

from app.codes.codebook import CodeMatrix, fingerprint
from app.core.config import get_config
from app.core.errors import ValidationError
from app.core.logging import get_logger
from app.core.types import format_answers
from app.crowd.models import CrowdSpec
from app.crowd.sampling import sample_reliability_matrix
from app.fusion.decision import (
    coding_answers,
    decode_hamming_batch,
    decode_majority_batch,
    default_group_map,
    drop_answers,
    local_decisions,
    majority_answers,
)
from app.sim.rng import Stream, chunk_bounds, stream
from app.storage.artifacts import write_csv

log = get_logger(__name__)

TRACE_HEADER = ("trial", "true_class", "answers", "decoded")


class Rule(str, Enum):
    CODING = "coding"
    MAJORITY = "majority"


class Resample(str, Enum):
    PER_TRIAL = "per-trial"
    FIXED = "fixed"


class Placement(str, Enum):
    SAME_GROUP = "same-group"
    INDEPENDENT = "independent"


@dataclass(frozen=True)
class SimConfig:
    m: int
    crowd: CrowdSpec
    trials: int
    seed: int = 0
    rule: Rule = Rule.CODING

    # Кодирование: матрица M x N; большинство: n и (необязательно) group_map
    matrix: Optional[CodeMatrix] = None
    n: Optional[int] = None
    group_map: Optional[Tuple[int, ...]] = None

    resample: Resample = Resample.PER_TRIAL
    placement: Placement = Placement.SAME_GROUP
    missing_rate: float = 0.0

    # None -> значения из monte_carlo в config.yaml
    chunk_size: Optional[int] = None
    workers: Optional[int] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "rule", Rule(self.rule))
        object.__setattr__(self, "resample", Resample(self.resample))
        object.__setattr__(self, "placement", Placement(self.placement))
        if self.trials < 1:
            raise ValidationError(f"Число испытаний должно быть >= 1, получено {self.trials}")
        if not 0.0 <= self.missing_rate < 1.0:
            raise ValidationError(f"missing_rate должен быть в [0, 1), получено {self.missing_rate}")
        if self.rule == Rule.CODING:
            if self.matrix is None:
                raise ValidationError("Для кодирования нужна кодовая матрица")
            if self.matrix.num_classes != self.m:
                raise ValidationError(f"Матрица на {self.matrix.num_classes} классов, а M={self.m}")
            if self.n is not None and self.n != self.matrix.num_workers:
                raise ValidationError(f"N={self.n} не совпадает с матрицей ({self.matrix.num_workers} столбцов)")
            object.__setattr__(self, "n", self.matrix.num_workers)
        else:
            if self.n is None:
                raise ValidationError("Для большинства нужно число работников n")
            gm = tuple(self.group_map) if self.group_map is not None else default_group_map(self.m, self.n)
            if len(gm) != self.n:
                raise ValidationError(f"group_map длины {len(gm)}, а работников {self.n}")
            object.__setattr__(self, "group_map", gm)
            split = self.split_pairs
            if split:
                log.warning(
                    "Пары %s попадают в разные группы битов (N=%d); для пар в одной группе "
                    "нужно N, кратное 2 log2 M, или --placement independent",
                    list(split), self.n,
                )

    # Пары (2i, 2i+1), которые при размещении same-group оказываются в разных группах битов
    @property
    def split_pairs(self) -> Tuple[Tuple[int, int], ...]:
        if self.rule != Rule.MAJORITY or not self.crowd.variant.paired or self.placement != Placement.SAME_GROUP:
            return ()
        gm = self.group_map or ()
        return tuple((j, j + 1) for j in range(0, len(gm) - 1, 2) if gm[j] != gm[j + 1])

    def to_dict(self) -> Dict[str, Any]:
        doc: Dict[str, Any] = {
            "m": self.m,
            "n": self.n,
            "rule": self.rule.value,
            "crowd": self.crowd.to_dict(),
            "trials": self.trials,
            "seed": self.seed,
            "resample": self.resample.value,
            "missing_rate": self.missing_rate,
            "chunk_size": self.chunk_size or get_config().monte_carlo.chunk_size,
        }
        if self.matrix is not None:
            doc["fingerprint"] = fingerprint(self.matrix)
        if self.rule == Rule.MAJORITY:
            doc["group_map"] = list(self.group_map or ())
            doc["placement"] = self.placement.value
        return doc


@dataclass(frozen=True)
class McEstimate:
    estimate: float
    stderr: float
    errors: int
    trials: int
    ties: int = 0
    trace: List[Tuple[int, int, str, int]] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {"estimate": self.estimate, "stderr": self.stderr, "errors": self.errors,
                "trials": self.trials, "ties": self.ties}


@dataclass(frozen=True)
class _ChunkResult:
    errors: int
    ties: int
    trace: List[Tuple[int, int, str, int]]


# =====================================================================
# Один блок испытаний
# =====================================================================

def _fixed_reliabilities(cfg: SimConfig) -> Optional[np.ndarray]:
    if cfg.resample != Resample.FIXED:
        return None
    rng = stream(cfg.seed, 0, Stream.FIXED_CROWD)
    return sample_reliability_matrix(cfg.crowd, cfg.n, 1, rng)[0]


def _group_maps(cfg: SimConfig, chunk: int, size: int) -> np.ndarray:
    gm = np.asarray(cfg.group_map, dtype=np.int64)
    if cfg.placement == Placement.SAME_GROUP:
        return gm
    rng = stream(cfg.seed, chunk, Stream.PLACEMENT)
    return rng.permuted(np.tile(gm, (size, 1)), axis=1)


def _count_ties(cfg: SimConfig, answers: np.ndarray, gm: np.ndarray) -> int:
    if cfg.rule == Rule.CODING:
        bits = cfg.matrix.bits.astype(np.int64)
        dist = (answers == 1).astype(np.int64) @ (1 - bits).T + (answers == 0).astype(np.int64) @ bits.T
        return int(((dist == dist.min(axis=1, keepdims=True)).sum(axis=1) > 1).sum())
    b = cfg.m.bit_length() - 1
    if gm.ndim == 1:
        gm = np.broadcast_to(gm, answers.shape)
    onehot = gm[:, :, None] == np.arange(b)[None, None, :]
    ones = ((answers == 1)[:, :, None] & onehot).sum(axis=1)
    zeros = ((answers == 0)[:, :, None] & onehot).sum(axis=1)
    return int(np.any(ones == zeros, axis=1).sum())


def _run_chunk(cfg: SimConfig, fixed: Optional[np.ndarray], chunk: int, start: int, stop: int, trace_limit: int) -> _ChunkResult:
    size = stop - start
    crowd_rng = stream(cfg.seed, chunk, Stream.CROWD)
    truth = crowd_rng.integers(cfg.m, size=size)
    if fixed is None:
        p = sample_reliability_matrix(cfg.crowd, cfg.n, size, crowd_rng)
    else:
        p = np.broadcast_to(fixed, (size, cfg.n))
    decisions = local_decisions(truth, p, cfg.m, crowd_rng)

    gm = np.empty(0)
    if cfg.rule == Rule.CODING:
        answers = coding_answers(cfg.matrix, decisions)
    else:
        gm = _group_maps(cfg, chunk, size)
        answers = majority_answers(decisions, gm, cfg.m)
    answers = drop_answers(answers, cfg.missing_rate, stream(cfg.seed, chunk, Stream.MISSING))

    ties_rng = stream(cfg.seed, chunk, Stream.TIES)
    if cfg.rule == Rule.CODING:
        decoded = decode_hamming_batch(cfg.matrix, answers, ties_rng)
    else:
        decoded = decode_majority_batch(cfg.m, gm, answers, ties_rng)

    errors = int(np.count_nonzero(decoded != truth))
    ties = _count_ties(cfg, answers, gm)
    trace: List[Tuple[int, int, str, int]] = []
    if start < trace_limit:
        for k in range(min(size, trace_limit - start)):
            trace.append((start + k, int(truth[k]), format_answers(answers[k]), int(decoded[k])))
    log.debug("Блок %d [%d, %d): ошибок %d, ничьих %d", chunk, start, stop, errors, ties)
    return _ChunkResult(errors=errors, ties=ties, trace=trace)


# =====================================================================
# Прогон
# =====================================================================

def run_mc(config: SimConfig, trace: bool = False) -> McEstimate:
    mc = get_config().monte_carlo
    chunk_size = config.chunk_size or mc.chunk_size
    workers = config.workers or mc.workers
    trace_limit = mc.trace_limit if trace else 0
    bounds = chunk_bounds(config.trials, chunk_size)
    fixed = _fixed_reliabilities(config)

    log.info("Монте-Карло: %s M=%d N=%d толпа=%s испытаний=%d seed=%d",
             config.rule.value, config.m, config.n, config.crowd.variant.value, config.trials, config.seed)

    def run(bound: Tuple[int, int, int]) -> _ChunkResult:
        return _run_chunk(config, fixed, *bound, trace_limit=trace_limit)

    if workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, bounds))
    else:
        results = [run(b) for b in bounds]

    errors = sum(r.errors for r in results)
    ties = sum(r.ties for r in results)
    rows = [row for r in results for row in r.trace]
    estimate = errors / config.trials
    stderr = math.sqrt(estimate * (1.0 - estimate) / config.trials)
    log.info("Монте-Карло завершено: P_e=%.6g ± %.2g (ошибок %d)", estimate, stderr, errors)
    return McEstimate(estimate=estimate, stderr=stderr, errors=errors, trials=config.trials, ties=ties, trace=rows)


def write_trace(path: str | pathlib.Path, estimate: McEstimate) -> None:
    write_csv(path, TRACE_HEADER, estimate.trace)


__all__ = [
    "Rule",
    "Resample",
    "Placement",
    "SimConfig",
    "McEstimate",
    "run_mc",
    "write_trace",
    "TRACE_HEADER",
]
