"""
    Точные ожидаемые вероятности ошибки классификации P_e

    Кодирование вычисляется полным перебором всех 2^N принятых векторов
    блоками; для каждого вектора находится множество ближайших строк и
    стоимость 1 - 1/tie_count. Большинство - замкнутые формы через
    биномиальные функции выживания.

    Публичный API:
        - ExactPerfReport(value, proposition, params, fingerprint)
        - pe_conditional_coding(a, p) -> ExactPerfReport         # фиксированная толпа p_1..p_N
        - pe_iid_coding(a, mu) -> ExactPerfReport
        - pe_iid_majority(m, n, mu) -> ExactPerfReport
        - pe_majority_groups(m, sizes, mu) -> ExactPerfReport    # произвольные размеры групп битов
        - pe_paired_coding(a, mu, rho) -> ExactPerfReport        # пары (0,1), (2,3), ...
        - pe_paired_majority(m, n, mu, rho) -> ExactPerfReport
        - pe_grouped_coding(a, mu, kappa, truncation) -> ExactPerfReport
        - pe_grouped_paired_coding(a, mu, rho, kappa, truncation) -> ExactPerfReport
        - coding_report(a, crowd) / majority_report(m, n, crowd, group_map=None)  # формула по варианту толпы
        - pair_moments(m, mu, rho) -> (q, r)                     # вероятности ошибки бита: одного и обоих в паре

    Примечания:
        - N выше exact.max_exact_workers -> CapacityError (используйте Монте-Карло)
        - Суммирование компенсированное (math.fsum) внутри блоков и между блоками
        - Для пар rho ограничено диапазоном, достижимым величинами из [0, 1] со средним mu
"""

from __future__ import annotations
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Callable, Dict, Iterator, Optional, Sequence, Tuple

import math

import numpy as np
from scipy import special

from app.analytic.survival import survival_binomial
from app.codes.codebook import CodeMatrix, fingerprint
from app.core.config import get_config
from app.core.errors import CapacityError, InfeasibleCovarianceError, ValidationError
from app.core.logging import get_logger
from app.core.types import is_power_of_two
from app.crowd.models import CrowdSpec, Variant
from app.crowd.sampling import enumerate_assignments, group_assignment_prob
from app.fusion.decision import default_group_map

log = get_logger(__name__)


@dataclass(frozen=True)
class ExactPerfReport:
    value: float
    proposition: str
    params: Dict[str, Any] = field(default_factory=dict)
    fingerprint: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        doc: Dict[str, Any] = {"value": self.value, "proposition": self.proposition, "params": dict(self.params)}
        if self.fingerprint is not None:
            doc["fingerprint"] = self.fingerprint
        return doc


# =====================================================================
# Проверки входа
# =====================================================================

def _check_mu(mu: float) -> float:
    mu = float(mu)
    if not 0.0 <= mu <= 1.0:
        raise ValidationError(f"Средняя надёжность mu должна быть в [0, 1], получено {mu}")
    return mu


# Для X, Y в [0, 1] со средним mu: E[XY] в [max(0, 2mu - 1), mu]
def _check_rho(mu: float, rho: float) -> float:
    rho = float(rho)
    lo = max(-mu * mu, -(1.0 - mu) ** 2)
    hi = mu * (1.0 - mu)
    if not lo - 1e-15 <= rho <= hi + 1e-15:
        raise InfeasibleCovarianceError(
            f"rho={rho:.6g} недостижимо при mu={mu:.6g}: допустимый диапазон [{lo:.6g}, {hi:.6g}]"
        )
    return rho


def _check_capacity(n: int) -> None:
    cap = get_config().exact.max_exact_workers
    if n > cap:
        raise CapacityError(
            f"N={n} больше предела точного перебора {cap} (2^N векторов); используйте Монте-Карло (simulate)"
        )


def _bits_per_class(m: int) -> int:
    if not is_power_of_two(m) or m < 2:
        raise ValidationError(f"Для большинства M должно быть степенью двойки >= 2, получено {m}")
    return m.bit_length() - 1


def _clamp01(x: float) -> float:
    return min(1.0, max(0.0, x))


# =====================================================================
# Перебор принятых векторов
# =====================================================================

@lru_cache(maxsize=8)
def _all_received(n: int) -> np.ndarray:
    idx = np.arange(1 << n, dtype=np.int64)
    bits = ((idx[:, None] >> np.arange(n, dtype=np.int64)[None, :]) & 1).astype(np.uint8)
    bits.setflags(write=False)
    return bits


def _received_blocks(n: int) -> Iterator[np.ndarray]:
    block = get_config().exact.block_size
    total = 1 << n
    if total <= block:
        yield _all_received(n)
        return
    shifts = np.arange(n, dtype=np.int64)[None, :]
    for start in range(0, total, block):
        idx = np.arange(start, min(total, start + block), dtype=np.int64)
        yield ((idx[:, None] >> shifts) & 1).astype(np.uint8)


# Стоимость C[b, l] = 1 - 1/tie_count для ближайших строк, иначе 1
def _cost_block(bits: np.ndarray, received: np.ndarray) -> np.ndarray:
    a = bits.astype(np.float64)
    r = received.astype(np.float64)
    dist = r @ (1.0 - a).T + (1.0 - r) @ a.T
    tied = dist == dist.min(axis=1, keepdims=True)
    ties = tied.sum(axis=1, keepdims=True)
    return np.where(tied, 1.0 - 1.0 / ties, 1.0)


def _others_sum(bits: np.ndarray) -> np.ndarray:
    b = bits.astype(np.float64)
    return b.sum(axis=0, keepdims=True) - b


"""
    P(u_j = 1 | класс l) при надёжности p_j:
    p_j a_lj + (1 - p_j)/(M - 1) * (число остальных строк с единицей в столбце j)
"""
def _answer_probs(bits: np.ndarray, p: np.ndarray) -> np.ndarray:
    m = bits.shape[0]
    return p[None, :] * bits + (1.0 - p[None, :]) / (m - 1) * _others_sum(bits)


def _coding_sum(bits: np.ndarray, vector_probs) -> float:
    n = bits.shape[1]
    parts = []
    for received in _received_blocks(n):
        costs = _cost_block(bits, received)
        probs = vector_probs(received)
        parts.append(math.fsum((probs * costs).ravel()))
    return math.fsum(parts) / bits.shape[0]


# =====================================================================
# Кодирование: независимые работники
# =====================================================================

def _conditional_value(a: CodeMatrix, p: np.ndarray) -> float:
    w = _answer_probs(a.bits, p)

    def vector_probs(received: np.ndarray) -> np.ndarray:
        ones = received[:, None, :].astype(bool)
        return np.where(ones, w[None, :, :], 1.0 - w[None, :, :]).prod(axis=2)

    return _coding_sum(a.bits, vector_probs)


def pe_conditional_coding(a: CodeMatrix, p: Sequence[float]) -> ExactPerfReport:
    p_arr = np.asarray(p, dtype=float).reshape(-1)
    if p_arr.shape[0] != a.num_workers:
        raise ValidationError(f"Длина p={p_arr.shape[0]} не равна числу работников {a.num_workers}")
    if np.any((p_arr < 0.0) | (p_arr > 1.0)):
        raise ValidationError("Надёжности p_j должны быть в [0, 1]")
    _check_capacity(a.num_workers)
    value = _clamp01(_conditional_value(a, p_arr))
    return ExactPerfReport(
        value=value,
        proposition="conditional-coding",
        params={"m": a.num_classes, "n": a.num_workers, "p": p_arr.tolist()},
        fingerprint=fingerprint(a),
    )


# Ответ линеен по каждому p_j, поэтому подстановка mu вместо p_j точна
def pe_iid_coding(a: CodeMatrix, mu: float) -> ExactPerfReport:
    mu = _check_mu(mu)
    _check_capacity(a.num_workers)
    value = _clamp01(_conditional_value(a, np.full(a.num_workers, mu)))
    log.debug("iid-coding: M=%d N=%d mu=%.4f -> %.6g", a.num_classes, a.num_workers, mu, value)
    return ExactPerfReport(
        value=value,
        proposition="iid-coding",
        params={"m": a.num_classes, "n": a.num_workers, "mu": mu},
        fingerprint=fingerprint(a),
    )


# =====================================================================
# Большинство: независимые работники
# =====================================================================

# Вероятность ошибки в одном бите: M/2 из M-1 чужих классов имеют другой бит
def bit_error_probability(m: int, mu: float) -> float:
    return m * (1.0 - mu) / (2.0 * (m - 1))


def _bit_correct(size: int, q: float) -> float:
    half = size / 2.0
    return 0.5 * (1.0 + survival_binomial(size, 1.0 - q, half) - survival_binomial(size, q, half))


def pe_majority_groups(m: int, sizes: Sequence[int], mu: float) -> ExactPerfReport:
    b = _bits_per_class(m)
    mu = _check_mu(mu)
    sizes = [int(s) for s in sizes]
    if len(sizes) != b or any(s < 1 for s in sizes):
        raise ValidationError(f"Нужно {b} непустых групп битов, получено {sizes}")
    q = bit_error_probability(m, mu)
    correct = math.prod(_bit_correct(s, q) for s in sizes)
    return ExactPerfReport(
        value=_clamp01(1.0 - correct),
        proposition="majority-groups",
        params={"m": m, "n": sum(sizes), "mu": mu, "sizes": sizes},
    )


def pe_iid_majority(m: int, n: int, mu: float) -> ExactPerfReport:
    b = _bits_per_class(m)
    mu = _check_mu(mu)
    if n < 1 or n % b != 0:
        raise ValidationError(f"N={n} должно делиться на log2 M={b}")
    per_group = n // b
    q = bit_error_probability(m, mu)
    inner = 1.0 + survival_binomial(per_group, 1.0 - q, per_group / 2.0) - survival_binomial(per_group, q, per_group / 2.0)
    value = 1.0 - inner ** b / m
    return ExactPerfReport(
        value=_clamp01(value),
        proposition="iid-majority",
        params={"m": m, "n": n, "mu": mu},
    )


# =====================================================================
# Пары работников с ковариацией rho
# =====================================================================

def pair_moments(m: int, mu: float, rho: float) -> Tuple[float, float]:
    q = bit_error_probability(m, mu)
    r = (m / (2.0 * (m - 1))) ** 2 * ((1.0 - mu) ** 2 + rho)
    return q, r


"""
    Ожидание произведения вероятностей ответов пары (a, b) по совместному
    распределению надёжностей: E[p_a] = E[p_b] = mu, E[p_a p_b] = rho + mu^2.
    E[F_a F_b] раскрывается по a_l, s_l (сумма по остальным строкам) и
    r = (M/(2(M-1)))^2 ((1-mu)^2 + rho), откуда (1-mu)^2 + rho = 4r (M-1)^2 / M^2
"""
def _pair_terms(bits: np.ndarray, received: np.ndarray, mu: float, rho: float) -> np.ndarray:
    m = bits.shape[0]
    b = bits.astype(np.float64)
    s = _others_sum(bits)
    _, r = pair_moments(m, mu, rho)
    both = rho + mu * mu

    a_a, a_b = b[:, 0::2], b[:, 1::2]
    s_a, s_b = s[:, 0::2], s[:, 1::2]
    f_a = mu * a_a + (1.0 - mu) / (m - 1) * s_a
    f_b = mu * a_b + (1.0 - mu) / (m - 1) * s_b
    joint = (
        both * a_a * a_b
        + (mu - both) / (m - 1) * (a_a * s_b + a_b * s_a)
        + 4.0 * r / (m * m) * s_a * s_b
    )

    i_a = received[:, None, 0::2].astype(np.float64)
    i_b = received[:, None, 1::2].astype(np.float64)
    term = (
        (1.0 - i_a) * (1.0 - i_b)
        + (1.0 - i_a) * (2.0 * i_b - 1.0) * f_b[None]
        + (1.0 - i_b) * (2.0 * i_a - 1.0) * f_a[None]
        + (2.0 * i_a - 1.0) * (2.0 * i_b - 1.0) * joint[None]
    )
    return term.prod(axis=2)


def _paired_value(a: CodeMatrix, mu: float, rho: float) -> float:
    return _coding_sum(a.bits, lambda received: _pair_terms(a.bits, received, mu, rho))


def _check_even(n: int) -> None:
    if n % 2 != 0:
        raise ValidationError(f"Для пар работников нужно чётное N, получено {n}")


def pe_paired_coding(a: CodeMatrix, mu: float, rho: float) -> ExactPerfReport:
    mu = _check_mu(mu)
    rho = _check_rho(mu, rho)
    _check_even(a.num_workers)
    _check_capacity(a.num_workers)
    value = _clamp01(_paired_value(a, mu, rho))
    return ExactPerfReport(
        value=value,
        proposition="paired-coding",
        params={"m": a.num_classes, "n": a.num_workers, "mu": mu, "rho": rho},
        fingerprint=fingerprint(a),
    )


# Биномиальный коэффициент, равный 0 вне треугольника Паскаля
def _comb(n: int, k: int) -> int:
    if n < 0 or k < 0 or k > n:
        return 0
    return int(special.comb(n, k, exact=True))


"""
    b_j = sum_g C(h, g) C(h - g, j + g - h) [2(q - r)]^(2h - j - 2g) (r (1 - 2q + r))^g,
    h = число пар в группе; сумма b_j (1-2q+r)^(j-h) по j > h - вероятность строгого
    большинства верных ответов, сумма b_j r^(j-h) - строгого большинства неверных
"""
def _pair_majority_coefficients(per_group: int, q: float, r: float) -> Dict[int, float]:
    h = per_group // 2
    one_wrong = 2.0 * (q - r)
    both_ways = r * (1.0 - 2.0 * q + r)
    out: Dict[int, float] = {}
    for j in range(h + 1, per_group + 1):
        terms = [
            _comb(h, g) * _comb(h - g, j + g - h) * one_wrong ** (per_group - j - 2 * g) * both_ways ** g
            for g in range(0, (per_group - j) // 2 + 1)
        ]
        out[j] = math.fsum(terms)
    return out


def pe_paired_majority(m: int, n: int, mu: float, rho: float) -> ExactPerfReport:
    b = _bits_per_class(m)
    mu = _check_mu(mu)
    rho = _check_rho(mu, rho)
    if n < 1 or n % (2 * b) != 0:
        raise ValidationError(f"N={n} должно делиться на 2 log2 M={2 * b}")
    per_group = n // b
    h = per_group // 2
    q, r = pair_moments(m, mu, rho)
    right = 1.0 - 2.0 * q + r
    coeffs = _pair_majority_coefficients(per_group, q, r)
    margin = math.fsum(c * (right ** (j - h) - r ** (j - h)) for j, c in coeffs.items())
    value = 1.0 - (1.0 + margin) ** b / m
    return ExactPerfReport(
        value=_clamp01(value),
        proposition="paired-majority",
        params={"m": m, "n": n, "mu": mu, "rho": rho},
    )


# =====================================================================
# Латентные группы
# =====================================================================

def _check_grouped_budget(n: int, truncation: int) -> None:
    cfg = get_config().exact
    if truncation < 1:
        raise ValidationError(f"Усечение L должно быть >= 1, получено {truncation}")
    if n > cfg.max_grouped_workers or truncation > cfg.max_grouped_truncation:
        raise CapacityError(
            f"Перебор L^N назначений для N={n}, L={truncation} вне бюджета "
            f"(N <= {cfg.max_grouped_workers}, L <= {cfg.max_grouped_truncation}); используйте Монте-Карло"
        )


# sum_s P(S = s) * inner(p_s), p_s - надёжности работников при назначении s; inner кэшируется по p_s
def _grouped_sum(n: int, mu: float, kappa: float, truncation: int,
                 inner: Callable[[Tuple[float, ...]], float]) -> Tuple[float, float]:
    if kappa <= 0:
        raise ValidationError(f"Концентрация kappa должна быть > 0, получено {kappa}")
    group_mu = np.full(truncation, mu)
    cache: Dict[Tuple[float, ...], float] = {}
    terms, weights = [], []
    for s in enumerate_assignments(n, truncation):
        weight = group_assignment_prob(s, kappa)
        key = tuple(group_mu[list(s.labels)].tolist())
        if key not in cache:
            cache[key] = inner(key)
        terms.append(weight * cache[key])
        weights.append(weight)
    return math.fsum(terms), math.fsum(weights)


"""
    Формула для латентных групп взвешивает внутреннее произведение по вероятностям
    назначений P(S = s). Внутреннее произведение записано через общее mu групп, так что
    на практике сумма равна P_e * sum_s P(S = s) и зависит от kappa только через
    усечённую массу назначений.
"""
def pe_grouped_coding(a: CodeMatrix, mu: float, kappa: float, truncation: int) -> ExactPerfReport:
    mu = _check_mu(mu)
    _check_grouped_budget(a.num_workers, truncation)
    value, mass = _grouped_sum(a.num_workers, mu, kappa, truncation, lambda p: _conditional_value(a, np.asarray(p)))
    return ExactPerfReport(
        value=_clamp01(value),
        proposition="grouped-coding",
        params={"m": a.num_classes, "n": a.num_workers, "mu": mu, "kappa": kappa, "truncation": truncation,
                "assignment_mass": mass},
        fingerprint=fingerprint(a),
    )


def pe_grouped_paired_coding(a: CodeMatrix, mu: float, rho: float, kappa: float, truncation: int) -> ExactPerfReport:
    mu = _check_mu(mu)
    rho = _check_rho(mu, rho)
    _check_even(a.num_workers)
    _check_grouped_budget(a.num_workers, truncation)
    # у всех групп одно mu, поэтому пара берёт моменты (p_s[0], rho)
    value, mass = _grouped_sum(a.num_workers, mu, kappa, truncation, lambda p: _paired_value(a, p[0], rho))
    return ExactPerfReport(
        value=_clamp01(value),
        proposition="grouped-paired-coding",
        params={"m": a.num_classes, "n": a.num_workers, "mu": mu, "rho": rho, "kappa": kappa,
                "truncation": truncation, "assignment_mass": mass},
        fingerprint=fingerprint(a),
    )


# =====================================================================
# Выбор формулы по CrowdSpec
# =====================================================================

def coding_report(a: CodeMatrix, crowd: CrowdSpec) -> ExactPerfReport:
    if crowd.variant == Variant.IID:
        return pe_iid_coding(a, crowd.mean)
    if crowd.variant == Variant.PAIRED:
        return pe_paired_coding(a, crowd.mean, crowd.rho)
    if crowd.truncation is None:
        raise ValidationError("Точная формула для латентных групп требует усечения L (--truncation)")
    if crowd.variant == Variant.LATENT_GROUPS:
        return pe_grouped_coding(a, crowd.mean, crowd.kappa, crowd.truncation)
    return pe_grouped_paired_coding(a, crowd.mean, crowd.rho, crowd.kappa, crowd.truncation)


def majority_report(m: int, n: int, crowd: CrowdSpec, group_map: Optional[Sequence[int]] = None) -> ExactPerfReport:
    gm = tuple(group_map) if group_map is not None else default_group_map(m, n)
    contiguous = gm == default_group_map(m, n)
    b = _bits_per_class(m)
    if crowd.variant == Variant.IID:
        if contiguous and n % b == 0:
            return pe_iid_majority(m, n, crowd.mean)
        return pe_majority_groups(m, [gm.count(k) for k in range(b)], crowd.mean)
    if crowd.variant == Variant.PAIRED and contiguous:
        return pe_paired_majority(m, n, crowd.mean, crowd.rho)
    raise ValidationError(f"Нет точной формулы большинства для варианта {crowd.variant.value} при таком разбиении")


__all__ = [
    "ExactPerfReport",
    "coding_report",
    "majority_report",
    "pe_conditional_coding",
    "pe_iid_coding",
    "bit_error_probability",
    "pe_majority_groups",
    "pe_iid_majority",
    "pair_moments",
    "pe_paired_coding",
    "pe_paired_majority",
    "pe_grouped_coding",
    "pe_grouped_paired_coding",
]
