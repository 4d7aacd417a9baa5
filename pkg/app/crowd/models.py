"""
    Модели толпы: распределения надёжности и описание толпы CrowdSpec

    Публичный API:
        - SpammerHammer(quality, p_spammer, p_hammer)       # смесь спамеров и «молотков»
        - BetaReliability(alpha, beta)
        - spammer_hammer(quality, m, p_hammer=1.0) -> SpammerHammer   # спамер угадывает: p = 1/M
        - Variant                                           # IID | PAIRED | LATENT_GROUPS | LATENT_GROUPS_PAIRED
        - CrowdSpec                                         # вариант + распределение + rho/kappa/truncation
        - mean_reliability(spec) -> float
        - variance(dist) -> float
        - covariance_from_correlation(dist, rho_corr) -> float
        - crowd_spec_from_dict(doc, m) -> CrowdSpec / CrowdSpec.to_dict()

    Примечания:
        - Распределения неизменяемы и хэшируемы: калибровка копулы кэшируется по ним
        - Для пар rho - ковариация, rho_corr = rho / Var(p) - коэффициент корреляции
"""

from __future__ import annotations
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Optional, Union

import math

import numpy as np
from scipy import stats

from app.core.errors import InfeasibleCovarianceError, ValidationError

# =====================================================================
# Распределения надёжности
# =====================================================================

@dataclass(frozen=True)
class SpammerHammer:
    quality: float
    p_spammer: float
    p_hammer: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.quality <= 1.0:
            raise ValidationError(f"Качество толпы Q должно быть в [0, 1], получено {self.quality}")
        for name in ("p_spammer", "p_hammer"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValidationError(f"{name} должно быть в [0, 1], получено {v}")

    @property
    def name(self) -> str:
        return "spammer-hammer"

    def mean(self) -> float:
        return self.quality * self.p_hammer + (1.0 - self.quality) * self.p_spammer

    def variance(self) -> float:
        return self.quality * (1.0 - self.quality) * (self.p_hammer - self.p_spammer) ** 2

    def sample(self, rng: np.random.Generator, size: Any) -> np.ndarray:
        hammer = rng.random(size) < self.quality
        return np.where(hammer, self.p_hammer, self.p_spammer).astype(float)

    # Квантиль: верхняя доля Q приходится на молотков
    def ppf(self, u: np.ndarray) -> np.ndarray:
        return np.where(np.asarray(u) > 1.0 - self.quality, self.p_hammer, self.p_spammer).astype(float)

    # Ковариация пары при гауссовой копуле с корреляцией c
    def induced_covariance(self, c: float, nodes: int = 96) -> float:
        if self.quality in (0.0, 1.0) or self.p_hammer == self.p_spammer:
            return 0.0
        t = stats.norm.ppf(1.0 - self.quality)
        c = float(np.clip(c, -1.0, 1.0))
        if c >= 1.0 - 1e-12:
            both = self.quality
        elif c <= -1.0 + 1e-12:
            both = max(0.0, 2.0 * self.quality - 1.0)
        else:
            both = float(stats.multivariate_normal(mean=[0.0, 0.0], cov=[[1.0, c], [c, 1.0]]).cdf([-t, -t]))
        return (self.p_hammer - self.p_spammer) ** 2 * (both - self.quality ** 2)

    def to_dict(self) -> Dict[str, Any]:
        return {"model": self.name, "q": self.quality, "p_spammer": self.p_spammer, "p_hammer": self.p_hammer}


@dataclass(frozen=True)
class BetaReliability:
    alpha: float
    beta: float

    def __post_init__(self) -> None:
        if self.alpha <= 0 or self.beta <= 0:
            raise ValidationError(f"Параметры Beta должны быть > 0, получено ({self.alpha}, {self.beta})")

    @property
    def name(self) -> str:
        return "beta"

    def mean(self) -> float:
        return self.alpha / (self.alpha + self.beta)

    def variance(self) -> float:
        s = self.alpha + self.beta
        return self.alpha * self.beta / (s * s * (s + 1.0))

    def sample(self, rng: np.random.Generator, size: Any) -> np.ndarray:
        return rng.beta(self.alpha, self.beta, size)

    def ppf(self, u: np.ndarray) -> np.ndarray:
        return stats.beta.ppf(u, self.alpha, self.beta)

    # E[g(Z1) g(Z2)] по квадратуре Гаусса-Эрмита, g = ppf(Phi(.))
    def induced_covariance(self, c: float, nodes: int = 96) -> float:
        x, w = np.polynomial.hermite_e.hermegauss(nodes)
        w = w / math.sqrt(2.0 * math.pi)
        c = float(np.clip(c, -1.0, 1.0))
        s = math.sqrt(max(0.0, 1.0 - c * c))
        g1 = self.ppf(stats.norm.cdf(x))
        z2 = c * x[:, None] + s * x[None, :]
        g2 = self.ppf(stats.norm.cdf(z2))
        second = float(np.einsum("i,k,i,ik->", w, w, g1, g2))
        mu = self.mean()
        return second - mu * mu

    def to_dict(self) -> Dict[str, Any]:
        return {"model": self.name, "alpha": self.alpha, "beta": self.beta}


ReliabilityDist = Union[SpammerHammer, BetaReliability]


def spammer_hammer(quality: float, m: int, p_hammer: float = 1.0) -> SpammerHammer:
    return SpammerHammer(quality=quality, p_spammer=1.0 / m, p_hammer=p_hammer)


def variance(dist: ReliabilityDist) -> float:
    return dist.variance()


def covariance_from_correlation(dist: ReliabilityDist, rho_corr: float) -> float:
    if not -1.0 <= rho_corr <= 1.0:
        raise ValidationError(f"Коэффициент корреляции должен быть в [-1, 1], получено {rho_corr}")
    if rho_corr == 0:
        return 0.0
    return rho_corr * dist.variance()


def dist_from_dict(doc: Dict[str, Any], m: int) -> ReliabilityDist:
    model = str(doc.get("model", "")).lower()
    if model in ("spammer-hammer", "spammer_hammer", "sh"):
        q = float(doc.get("q", doc.get("quality", 1.0)))
        return SpammerHammer(
            quality=q,
            p_spammer=float(doc.get("p_spammer", 1.0 / m)),
            p_hammer=float(doc.get("p_hammer", 1.0)),
        )
    if model == "beta":
        return BetaReliability(alpha=float(doc["alpha"]), beta=float(doc["beta"]))
    raise ValidationError(f"Неизвестная модель надёжности: {doc.get('model')!r}")


# =====================================================================
# Спецификация толпы
# =====================================================================

class Variant(str, Enum):
    IID = "iid"
    PAIRED = "paired"
    LATENT_GROUPS = "latent-groups"
    LATENT_GROUPS_PAIRED = "latent-groups-paired"

    @property
    def paired(self) -> bool:
        return self in (Variant.PAIRED, Variant.LATENT_GROUPS_PAIRED)

    @property
    def grouped(self) -> bool:
        return self in (Variant.LATENT_GROUPS, Variant.LATENT_GROUPS_PAIRED)


@dataclass(frozen=True)
class CrowdSpec:
    dist: ReliabilityDist
    variant: Variant = Variant.IID

    # Ковариация надёжностей в паре (только парные варианты)
    rho: float = 0.0

    # Концентрация GEM(kappa) и усечение L (только варианты с группами)
    kappa: Optional[float] = None
    truncation: Optional[int] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "variant", Variant(self.variant))
        if self.variant.paired:
            var = self.dist.variance()
            if abs(self.rho) > var + 1e-15:
                raise InfeasibleCovarianceError(
                    f"|rho|={abs(self.rho):.6g} превышает Var(p)={var:.6g}: такая ковариация пары недостижима"
                )
        elif self.rho != 0.0:
            raise ValidationError("rho задаётся только для парных вариантов толпы")
        if self.variant.grouped:
            if self.kappa is None or self.kappa <= 0:
                raise ValidationError(f"Для латентных групп нужна концентрация kappa > 0, получено {self.kappa}")
            if self.truncation is not None and self.truncation < 1:
                raise ValidationError(f"Усечение L должно быть >= 1, получено {self.truncation}")

    @property
    def mean(self) -> float:
        return self.dist.mean()

    @property
    def rho_corr(self) -> float:
        var = self.dist.variance()
        return self.rho / var if var > 0 else 0.0

    def to_dict(self) -> Dict[str, Any]:
        doc: Dict[str, Any] = {"variant": self.variant.value, "dist": self.dist.to_dict()}
        if self.variant.paired:
            doc["rho_corr"] = self.rho_corr
            doc["rho"] = self.rho
        if self.variant.grouped:
            doc["kappa"] = self.kappa
            doc["truncation"] = self.truncation
        return doc


def crowd_spec_from_dict(doc: Dict[str, Any], m: int) -> CrowdSpec:
    dist = dist_from_dict(doc.get("dist") or {}, m)
    variant = Variant(doc.get("variant", Variant.IID.value))
    rho = 0.0
    if variant.paired:
        if "rho" in doc:
            rho = float(doc["rho"])
        else:
            rho = covariance_from_correlation(dist, float(doc.get("rho_corr", 0.0)))
    kappa = doc.get("kappa")
    truncation = doc.get("truncation")
    return CrowdSpec(
        dist=dist,
        variant=variant,
        rho=rho,
        kappa=float(kappa) if kappa is not None else None,
        truncation=int(truncation) if truncation is not None else None,
    )


def mean_reliability(spec: Union[CrowdSpec, ReliabilityDist]) -> float:
    dist = spec.dist if isinstance(spec, CrowdSpec) else spec
    return dist.mean()


__all__ = [
    "SpammerHammer",
    "BetaReliability",
    "ReliabilityDist",
    "spammer_hammer",
    "variance",
    "covariance_from_correlation",
    "dist_from_dict",
    "Variant",
    "CrowdSpec",
    "crowd_spec_from_dict",
    "mean_reliability",
]
