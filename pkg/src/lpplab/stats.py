"""Shared estimators and goodness-of-fit machinery for the verification suites."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError


@dataclass(frozen=True)
class EmpiricalSample:
    """Uniformly weighted sample with a right-continuous step CDF."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.size == 0:
            raise ParameterError("empty sample")
        object.__setattr__(self, "values", np.sort(v))

    def cdf(self, x) -> np.ndarray:
        return np.searchsorted(self.values, np.asarray(x), side="right") / self.values.size


def ks_statistic(sample, cdf) -> float:
    """Sup-norm distance between the empirical CDF of ``sample`` and ``cdf``."""
    v = np.sort(np.asarray(sample, dtype=np.float64))
    if v.size == 0:
        raise ParameterError("empty sample")
    n = v.size
    f = np.asarray(cdf(v), dtype=np.float64)
    upper = np.arange(1, n + 1) / n - f
    lower = f - np.arange(0, n) / n
    return float(max(upper.max(), lower.max()))


def ks_critical(n: int, alpha: float = 0.05) -> float:
    """Asymptotic KS critical distance c(alpha)/sqrt(n)."""
    c = math.sqrt(-0.5 * math.log(alpha / 2.0))
    return c / math.sqrt(n)


def mean_ci(sample, level: float = 0.95) -> tuple[float, float]:
    """Normal-approximation confidence interval: (mean, half width)."""
    v = np.asarray(sample, dtype=np.float64)
    if v.size < 2:
        raise ParameterError("need at least two values")
    if not 0.0 <= level < 1.0:
        raise ParameterError("level must be in [0, 1)")
    mean = float(v.mean())
    stderr = float(v.std(ddof=1) / math.sqrt(v.size))
    z = math.sqrt(2.0) * _erfinv(level)
    return mean, z * stderr


def _erfinv(y: float) -> float:
    from scipy.special import erfinv

    return float(erfinv(y))


def exp_rate_mle(sample) -> float:
    """Maximum-likelihood rate of an exponential sample: 1 / mean."""
    v = np.asarray(sample, dtype=np.float64)
    if v.size == 0:
        raise ParameterError("empty sample")
    if np.any(v <= 0):
        raise ParameterError("exponential rate MLE needs strictly positive values")
    return float(1.0 / v.mean())
