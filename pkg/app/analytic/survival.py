"""
    Биномиальная функция выживания и стоимость глобального решения

    Публичный API:
        - survival_binomial(n, p, k) -> float      # P(Binomial(n, p) > k), сумма с floor(k + 1)
        - cost(profile, true_class) -> float       # 1 - 1/tie_count, если класс среди ближайших, иначе 1
"""

from __future__ import annotations

import math

from scipy import stats

from app.codes.codebook import DecisionProfile
from app.core.errors import ValidationError


def survival_binomial(n: int, p: float, k: float) -> float:
    if n < 0:
        raise ValidationError(f"n должно быть >= 0, получено {n}")
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"p должно быть в [0, 1], получено {p}")
    start = max(0, math.floor(k + 1))
    if start > n:
        return 0.0

    return float(stats.binom.sf(start - 1, n, p))


def cost(profile: DecisionProfile, true_class: int) -> float:
    if true_class in profile.argmin_rows:
        return 1.0 - 1.0 / profile.tie_count
    return 1.0


__all__ = ["survival_binomial", "cost"]
