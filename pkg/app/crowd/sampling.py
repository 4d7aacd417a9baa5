"""
    Генерация надёжностей работников и латентных групп

    Публичный API:
        - GroupAssignment(labels, num_groups)                   # s_1..s_N и размеры групп n_l
        - group_assignment_prob(s, kappa, n=None) -> float      # P(S = s) для усечённого GEM(kappa)
        - enumerate_assignments(n, num_groups) -> Iterator[GroupAssignment]
        - sample_group_labels(kappa, n, trials, rng, truncation=None) -> np.ndarray (trials, n)
        - sample_group_assignment(kappa, n, truncation, rng) -> GroupAssignment   # одно назначение
        - calibrate_copula(dist, rho) -> float                  # корреляция гауссовой копулы
        - calibrate_group_copula(dist, rho) -> float            # то же для маргинали работника в группах
        - group_pair_covariance(dist, c) -> float
        - sample_reliability_matrix(spec, n, trials, rng) -> np.ndarray (trials, n)
        - sample_reliabilities(spec, n, seed) -> np.ndarray (n,)

    Примечания:
        - Пары: (0,1), (2,3), ... в нумерации с нуля
        - truncation=None - точный неусечённый GEM(kappa) через последовательное правило
          «китайского ресторана»; метки групп тогда идут в порядке появления
        - В парах с группами группа задаёт надёжность ведущего (чётный индекс), партнёр
          получает её через копулу по маргинали работника, и Cov(p_j, p_j') = rho
        - Всё детерминировано при фиксированном seed / rng, общего изменяемого состояния нет
"""

from __future__ import annotations
from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Iterator, Optional, Sequence, Tuple

import math

import numpy as np
from scipy import optimize, special, stats

from app.core.config import get_config
from app.core.errors import InfeasibleCovarianceError, ValidationError
from app.core.logging import get_logger
from app.crowd.models import CrowdSpec, ReliabilityDist, Variant

log = get_logger(__name__)


# =====================================================================
# Назначение в группы
# =====================================================================

@dataclass(frozen=True)
class GroupAssignment:
    labels: Tuple[int, ...]
    num_groups: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "labels", tuple(int(s) for s in self.labels))
        if self.num_groups < 1:
            raise ValidationError(f"Число групп L должно быть >= 1, получено {self.num_groups}")
        bad = [s for s in self.labels if not 0 <= s < self.num_groups]
        if bad:
            raise ValidationError(f"Метки групп вне диапазона 0..{self.num_groups - 1}: {bad}")

    @property
    def num_workers(self) -> int:
        return len(self.labels)

    @property
    def sizes(self) -> Tuple[int, ...]:
        counts = [0] * self.num_groups
        for s in self.labels:
            counts[s] += 1
        return tuple(counts)


def _log_assignment_prob(sizes: Sequence[int], kappa: float) -> float:
    n = sum(sizes)
    total = 0.0
    cum = 0
    for n_l in sizes:
        cum += n_l
        total += special.betaln(n_l + 1, n + kappa - cum) - special.betaln(1.0, kappa)
    return total


# P(S=s) = prod_l B(n_l + 1, N + kappa - sum_{g<=l} n_g) / B(1, kappa)^L
def group_assignment_prob(s: GroupAssignment, kappa: float, n: Optional[int] = None) -> float:
    if kappa <= 0:
        raise ValidationError(f"Концентрация kappa должна быть > 0, получено {kappa}")
    if n is not None and n != s.num_workers:
        raise ValidationError(f"N={n} не совпадает с длиной назначения {s.num_workers}")
    return math.exp(_log_assignment_prob(s.sizes, kappa))


def enumerate_assignments(n: int, num_groups: int) -> Iterator[GroupAssignment]:
    for labels in product(range(num_groups), repeat=n):
        yield GroupAssignment(labels=labels, num_groups=num_groups)


# Усечённое разбиение палочки: остаток отдаётся последней метке L-1
def _stick_breaking_labels(kappa: float, n: int, trials: int, truncation: int, rng: np.random.Generator) -> np.ndarray:
    if truncation == 1:
        return np.zeros((trials, n), dtype=np.int64)
    gammas = rng.beta(1.0, kappa, size=(trials, truncation - 1))
    remaining = np.cumprod(1.0 - gammas, axis=1)
    lam = np.empty((trials, truncation))
    lam[:, 0] = gammas[:, 0]
    lam[:, 1:-1] = gammas[:, 1:] * remaining[:, :-1]
    lam[:, -1] = remaining[:, -1]
    cdf = np.cumsum(lam, axis=1)
    u = rng.random((trials, n))
    labels = (cdf[:, None, :-1] <= u[:, :, None]).sum(axis=2)
    return np.minimum(labels, truncation - 1).astype(np.int64)


# Неусечённый GEM(kappa): работник j садится к группе k с вероятностью n_k/(j+kappa)
def _chinese_restaurant_labels(kappa: float, n: int, trials: int, rng: np.random.Generator) -> np.ndarray:
    labels = np.zeros((trials, n), dtype=np.int64)
    counts = np.zeros((trials, n), dtype=np.int64)
    opened = np.zeros(trials, dtype=np.int64)
    rows = np.arange(trials)
    for j in range(n):
        u = rng.random(trials) * (j + kappa)
        if j == 0:
            choice = np.zeros(trials, dtype=np.int64)
        else:
            cum = np.cumsum(counts[:, :j], axis=1)
            existing = (cum <= u[:, None]).sum(axis=1)
            choice = np.where(u >= j, opened, existing)
        labels[:, j] = choice
        counts[rows, choice] += 1
        opened = np.maximum(opened, choice + 1)
    return labels


def sample_group_labels(
    kappa: float,
    n: int,
    trials: int,
    rng: np.random.Generator,
    truncation: Optional[int] = None,
) -> np.ndarray:
    if kappa <= 0:
        raise ValidationError(f"Концентрация kappa должна быть > 0, получено {kappa}")
    if truncation is None:
        return _chinese_restaurant_labels(kappa, n, trials, rng)
    return _stick_breaking_labels(kappa, n, trials, truncation, rng)


def sample_group_assignment(
    kappa: float,
    n: int,
    truncation: Optional[int],
    rng: np.random.Generator,
) -> GroupAssignment:
    labels = sample_group_labels(kappa, n, 1, rng, truncation)[0]
    num_groups = truncation if truncation is not None else int(labels.max()) + 1
    return GroupAssignment(tuple(labels.tolist()), num_groups)


# =====================================================================
# Пары: гауссова копула
# =====================================================================

@lru_cache(maxsize=256)
def calibrate_copula(dist: ReliabilityDist, rho: float) -> float:
    if rho == 0.0:
        return 0.0
    nodes = get_config().crowd.quadrature_nodes
    lo = dist.induced_covariance(-1.0, nodes)
    hi = dist.induced_covariance(1.0, nodes)
    if not lo - 1e-12 <= rho <= hi + 1e-12:
        raise InfeasibleCovarianceError(
            f"Ковариация rho={rho:.6g} недостижима для {dist.name}: диапазон копулы [{lo:.6g}, {hi:.6g}]"
        )
    if rho >= hi:
        return 1.0
    if rho <= lo:
        return -1.0
    c = optimize.brentq(lambda x: dist.induced_covariance(x, nodes) - rho, -1.0, 1.0, xtol=1e-10)
    log.debug("Копула для %s, rho=%.6g: c=%.6f", dist.name, rho, c)
    return float(c)


def _paired_normals(trials: int, n: int, c: float, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal((trials, n))
    s = math.sqrt(max(0.0, 1.0 - c * c))
    z[:, 1::2] = c * z[:, 0::2] + s * z[:, 1::2]
    return z


# =====================================================================
# Пары внутри латентных групп
# =====================================================================

# Маргиналь надёжности работника: смесь Beta(r/(1-r), 1) по r из dist
_WORKER_GRID = 2049
_GROUP_NODES = 512


@lru_cache(maxsize=64)
def _worker_marginal(dist: ReliabilityDist) -> Tuple[np.ndarray, np.ndarray]:
    clip = get_config().crowd.reliability_clip
    r = np.asarray(dist.ppf((np.arange(_GROUP_NODES) + 0.5) / _GROUP_NODES), dtype=float)
    perfect = r >= 1.0
    rc = np.clip(r, clip, 1.0 - clip)
    xs = np.linspace(0.0, 1.0, _WORKER_GRID)
    cdf = np.where(perfect[None, :], 0.0, np.power(xs[:, None], ((1.0 - rc) / rc)[None, :])).mean(axis=1)
    # строго возрастающая таблица для np.interp; cdf[-1] = 1 - доля идеальных групп
    cdf = np.maximum.accumulate(cdf) + np.linspace(0.0, 1e-12, _WORKER_GRID)
    return xs, cdf


def _worker_ppf(dist: ReliabilityDist, u: np.ndarray) -> np.ndarray:
    xs, cdf = _worker_marginal(dist)
    return np.interp(u, cdf, xs)


# Рандомизированное преобразование p -> u ~ U(0, 1); атом в p = 1 размазывается по [F(1-), 1]
def _worker_cdf(dist: ReliabilityDist, p: np.ndarray, v: np.ndarray) -> np.ndarray:
    xs, cdf = _worker_marginal(dist)
    u = np.interp(p, xs, cdf)
    return np.where(p >= 1.0, cdf[-1] + v * (1.0 - cdf[-1]), u)


def _worker_induced_covariance(dist: ReliabilityDist, c: float, nodes: int) -> float:
    x, w = np.polynomial.hermite_e.hermegauss(nodes)
    w = w / math.sqrt(2.0 * math.pi)
    c = float(np.clip(c, -1.0, 1.0))
    s = math.sqrt(max(0.0, 1.0 - c * c))
    g1 = _worker_ppf(dist, stats.norm.cdf(x))
    g2 = _worker_ppf(dist, stats.norm.cdf(c * x[:, None] + s * x[None, :]))
    first = float(w @ g1)
    return float(np.einsum("i,k,i,ik->", w, w, g1, g2)) - first * first


@lru_cache(maxsize=256)
def calibrate_group_copula(dist: ReliabilityDist, rho: float) -> float:
    if rho == 0.0:
        return 0.0
    nodes = get_config().crowd.quadrature_nodes
    lo = _worker_induced_covariance(dist, -1.0, nodes)
    hi = _worker_induced_covariance(dist, 1.0, nodes)
    if not lo - 1e-12 <= rho <= hi + 1e-12:
        raise InfeasibleCovarianceError(
            f"Ковариация rho={rho:.6g} недостижима для пары в группах ({dist.name}): "
            f"диапазон копулы [{lo:.6g}, {hi:.6g}]"
        )
    if rho >= hi:
        return 1.0
    if rho <= lo:
        return -1.0
    c = optimize.brentq(lambda x: _worker_induced_covariance(dist, x, nodes) - rho, -1.0, 1.0, xtol=1e-10)
    log.debug("Копула пары в группах для %s, rho=%.6g: c=%.6f", dist.name, rho, c)
    return float(c)


def group_pair_covariance(dist: ReliabilityDist, c: float) -> float:
    return _worker_induced_covariance(dist, c, get_config().crowd.quadrature_nodes)


# Партнёр (нечётный индекс) связан с ведущим копулой по маргинали работника,
# поэтому Cov(p_j, p_j') = rho при любом разбиении на группы
def _pair_with_leaders(dist: ReliabilityDist, rho: float, p: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    c = calibrate_group_copula(dist, rho)
    lead = p[:, 0::2]
    u = np.clip(_worker_cdf(dist, lead, rng.random(lead.shape)), 1e-12, 1.0 - 1e-12)
    s = math.sqrt(max(0.0, 1.0 - c * c))
    z = c * stats.norm.ppf(u) + s * rng.standard_normal(lead.shape)
    out = p.copy()
    out[:, 1::2] = _worker_ppf(dist, stats.norm.cdf(z))
    return out


# =====================================================================
# Надёжности работников
# =====================================================================

# Beta(r/(1-r), 1) имеет квантиль u^((1-r)/r); при r = 1 точечная масса в 1
def _worker_from_group(r: np.ndarray, u: np.ndarray) -> np.ndarray:
    clip = get_config().crowd.reliability_clip
    perfect = r >= 1.0
    rc = np.clip(r, clip, 1.0 - clip)
    p = np.power(u, (1.0 - rc) / rc)
    return np.where(perfect, 1.0, p)


def sample_reliability_matrix(spec: CrowdSpec, n: int, trials: int, rng: np.random.Generator) -> np.ndarray:
    if n < 1 or trials < 1:
        raise ValidationError(f"Нужно N >= 1 и trials >= 1, получено N={n}, trials={trials}")
    if spec.variant.paired and n % 2 != 0:
        raise ValidationError(f"Для парной модели нужно чётное N, получено {n}")

    dist = spec.dist
    if spec.variant == Variant.IID:
        p = dist.sample(rng, (trials, n))

    elif spec.variant == Variant.PAIRED:
        c = calibrate_copula(dist, spec.rho)
        z = _paired_normals(trials, n, c, rng)
        p = dist.ppf(stats.norm.cdf(z))

    else:
        labels = sample_group_labels(spec.kappa, n, trials, rng, spec.truncation)
        num_groups = spec.truncation or n
        group_r = dist.sample(rng, (trials, num_groups))
        r = np.take_along_axis(group_r, labels, axis=1)
        p = _worker_from_group(r, rng.random((trials, n)))
        if spec.variant == Variant.LATENT_GROUPS_PAIRED:
            p = _pair_with_leaders(dist, spec.rho, p, rng)

    return np.clip(np.asarray(p, dtype=float), 0.0, 1.0)


def sample_reliabilities(spec: CrowdSpec, n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return sample_reliability_matrix(spec, n, 1, rng)[0]


__all__ = [
    "GroupAssignment",
    "group_assignment_prob",
    "enumerate_assignments",
    "sample_group_assignment",
    "sample_group_labels",
    "calibrate_copula",
    "calibrate_group_copula",
    "group_pair_covariance",
    "sample_reliability_matrix",
    "sample_reliabilities",
]
