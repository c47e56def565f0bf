"""Interval estimates and two-sample tests used by the experiment checks."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import stats as _st

from .errors import EmptySample


@dataclass(frozen=True)
class KSResult:
    statistic: float
    threshold: float
    passed: bool
    n_a: int
    n_b: int
    alpha: float

    def to_dict(self):
        return asdict(self)


def ks_threshold(n: int, m: int, alpha: float) -> float:
    """Asymptotic two-sample critical value ``c(alpha) sqrt((n+m)/(n m))``."""
    c = math.sqrt(-0.5 * math.log(alpha / 2))
    return c * math.sqrt((n + m) / (n * m))


def ks_statistic(a, b) -> float:
    a = np.sort(np.asarray(a, float))
    b = np.sort(np.asarray(b, float))
    grid = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, grid, side="right") / len(a)
    cdf_b = np.searchsorted(b, grid, side="right") / len(b)
    return float(np.max(np.abs(cdf_a - cdf_b)))


def two_sample_ks(a, b, alpha: float = 0.01) -> KSResult:
    a = np.ravel(np.asarray(a, float))
    b = np.ravel(np.asarray(b, float))
    if a.size == 0 or b.size == 0:
        raise EmptySample("two_sample_ks needs nonempty samples")
    d = ks_statistic(a, b)
    thr = ks_threshold(a.size, b.size, alpha)
    return KSResult(d, thr, bool(d <= thr), int(a.size), int(b.size), float(alpha))


def one_sample_ks(x, cdf, alpha: float = 0.01) -> KSResult:
    x = np.ravel(np.asarray(x, float))
    if x.size == 0:
        raise EmptySample("one_sample_ks needs a nonempty sample")
    d = float(_st.kstest(x, cdf).statistic)
    thr = math.sqrt(-0.5 * math.log(alpha / 2) / x.size)
    return KSResult(d, thr, bool(d <= thr), int(x.size), 0, float(alpha))


def wilson_interval(successes: int, n: int, confidence: float = 0.99) -> tuple[float, float]:
    if n <= 0:
        raise EmptySample("Wilson interval needs n >= 1")
    z = _st.norm.ppf(0.5 + confidence / 2)
    p = successes / n
    denom = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


def clopper_pearson_lower(successes: int, n: int, confidence: float) -> float:
    """One-sided lower confidence bound for a binomial proportion."""
    if successes <= 0:
        return 0.0
    return float(_st.beta.ppf(1 - confidence, successes, n - successes + 1))


def mean_and_se(x) -> tuple[float, float]:
    x = np.asarray(x, float)
    n = x.size
    if n == 0:
        raise EmptySample("empty sample")
    m = math.fsum(x) / n
    if n == 1:
        return m, 0.0
    var = math.fsum((x - m) ** 2) / (n - 1)
    return m, math.sqrt(var / n)


def variance_and_se(x) -> tuple[float, float]:
    """Unbiased variance and its standard error from the fourth central moment."""
    x = np.asarray(x, float)
    n = x.size
    m = math.fsum(x) / n
    d = x - m
    m2 = math.fsum(d ** 2) / n
    m4 = math.fsum(d ** 4) / n
    var = m2 * n / (n - 1)
    se = math.sqrt(max(m4 - m2 * m2, 0.0) / n)
    return var, se


def bonferroni(alpha: float, m: int) -> float:
    return alpha / max(m, 1)
