"""Special functions backing the calibration statistics.

Chi-square tail points come from the regularized lower incomplete gamma
function (power series for x < a+1, Lentz continued fraction otherwise),
inverted by bisection with a Newton polish.  No lookup tables; the test
suite cross-checks against an independent implementation.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import InvalidParameterError

_EPS = 1e-15
_MAX_ITER = 500


def gammainc_lower(a: float, x: float) -> float:
    """Regularized lower incomplete gamma P(a, x) for a > 0, x >= 0."""
    if a <= 0:
        raise InvalidParameterError(f"gamma shape must be positive, got {a}")
    if x < 0:
        raise InvalidParameterError(f"gamma argument must be >= 0, got {x}")
    if x == 0.0:
        return 0.0
    if x < a + 1.0:
        return _lower_series(a, x)
    return 1.0 - _upper_continued_fraction(a, x)


def _lower_series(a: float, x: float) -> float:
    term = 1.0 / a
    total = term
    denom = a
    for _ in range(_MAX_ITER):
        denom += 1.0
        term *= x / denom
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _upper_continued_fraction(a: float, x: float) -> float:
    # modified Lentz for Q(a, x) = e^{-x} x^a / Gamma(a) * 1/(x+1-a- 1/(x+3-a- ...))
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b if b != 0 else 1.0 / tiny
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return h * math.exp(-x + a * math.log(x) - math.lgamma(a))


def chi2_cdf(x: float, df: float = 1.0) -> float:
    if df <= 0:
        raise InvalidParameterError(f"degrees of freedom must be positive, got {df}")
    if x <= 0:
        return 0.0
    return gammainc_lower(df / 2.0, x / 2.0)


def chi2_quantile(p: float, df: float = 1.0) -> float:
    """Inverse chi-square CDF via bracketed bisection plus Newton steps."""
    if not 0.0 < p < 1.0:
        raise InvalidParameterError(f"quantile level must be in (0, 1), got {p}")
    if df <= 0:
        raise InvalidParameterError(f"degrees of freedom must be positive, got {df}")
    lo, hi = 0.0, max(df, 1.0)
    while chi2_cdf(hi, df) < p:
        hi *= 2.0
        if hi > 1e12:
            raise InvalidParameterError(f"quantile level {p} too extreme to bracket")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if chi2_cdf(mid, df) < p:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-13 * max(1.0, hi):
            break
    x = 0.5 * (lo + hi)
    # Newton polish; the density is chi2 pdf
    half = df / 2.0
    for _ in range(5):
        f = chi2_cdf(x, df) - p
        pdf = math.exp((half - 1.0) * math.log(x) - x / 2.0 - half * math.log(2.0) - math.lgamma(half))
        if pdf <= 0:
            break
        step = f / pdf
        x_new = x - step
        if x_new <= lo or x_new >= hi:
            break
        x = x_new
        if abs(step) <= 1e-14 * max(1.0, x):
            break
    return x


def ks_distance(samples: np.ndarray, cdf) -> float:
    """Kolmogorov-Smirnov sup distance between an empirical sample and a CDF."""
    x = np.sort(np.asarray(samples, dtype=np.float64))
    n = x.size
    if n == 0:
        raise InvalidParameterError("KS distance needs at least one sample")
    f = np.asarray([cdf(v) for v in x], dtype=np.float64)
    grid = np.arange(1, n + 1) / n
    return float(max(np.max(grid - f), np.max(f - (grid - 1.0 / n))))


_KS_COEFF = {0.10: 1.224, 0.05: 1.358, 0.01: 1.628}


def ks_critical(n: int, alpha: float = 0.01) -> float:
    """Asymptotic KS critical value c(alpha)/sqrt(n)."""
    if alpha not in _KS_COEFF:
        raise InvalidParameterError(f"alpha must be one of {sorted(_KS_COEFF)}, got {alpha}")
    if n < 1:
        raise InvalidParameterError(f"sample size must be >= 1, got {n}")
    return _KS_COEFF[alpha] / math.sqrt(n)
