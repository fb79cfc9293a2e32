"""Reference distributions used for p-values and interval multipliers.

The normal functions and the chi-square tail are self-contained; the
Student t functions delegate to :mod:`scipy.special`.
"""

import math

from scipy import special

from .errors import NumericalError

_SQRT2 = math.sqrt(2.0)

# Acklam's rational approximation, relative error ~1.15e-9 before polishing
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


def normal_cdf(z: float) -> float:
    """Standard normal CDF via the complementary error function."""
    return 0.5 * math.erfc(-z / _SQRT2)


def normal_sf(z: float) -> float:
    return 0.5 * math.erfc(z / _SQRT2)


def normal_quantile(p: float) -> float:
    """Inverse standard normal CDF.

    Rational approximation followed by one Halley correction, which brings
    the round-trip error ``|Phi(q) - p|`` to the 1e-16 level.
    """
    if not 0.0 < p < 1.0:
        if p in (0.0, 1.0):
            raise NumericalError("infinite quantile")
        raise ValueError("p must lie in (0, 1)")
    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        x = (((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]) / \
            ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0)
    elif p <= 1.0 - _P_LOW:
        q = p - 0.5
        r = q * q
        x = (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q / \
            (((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0)
    else:
        q = math.sqrt(-2.0 * math.log1p(-p))
        x = -(((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]) / \
            ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0)
    # work in the smaller tail to keep the residual accurate
    if x > 0:
        e = normal_sf(x) - (1.0 - p)
        e = -e
    else:
        e = normal_cdf(x) - p
    u = e * math.sqrt(2.0 * math.pi) * math.exp(0.5 * x * x)
    return x - u / (1.0 + 0.5 * x * u)


def _gamma_series(a, x):
    # lower regularized P(a, x) by series, valid for x < a + 1
    ap = a
    total = delta = 1.0 / a
    for _ in range(10_000):
        ap += 1.0
        delta *= x / ap
        total += delta
        if abs(delta) < abs(total) * 1e-16:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_cf(a, x):
    # upper regularized Q(a, x) by Lentz's continued fraction, x >= a + 1
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 10_000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        step = d * c
        h *= step
        if abs(step - 1.0) < 1e-16:
            break
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def chi2_sf(x: float, df: int) -> float:
    """Upper tail probability of the chi-square distribution."""
    if df <= 0:
        raise ValueError("df must be positive")
    if x <= 0:
        return 1.0
    a, h = 0.5 * df, 0.5 * x
    if h < a + 1.0:
        return 1.0 - _gamma_series(a, h)
    return _gamma_cf(a, h)


def two_sided_p(stat: float, df: float | None = None) -> float:
    """Two-sided p-value of a standardized statistic (normal when ``df`` is None)."""
    if df is None:
        return 2.0 * normal_sf(abs(stat))
    return float(2.0 * special.stdtr(df, -abs(stat)))


def critical_value(prob: float, df: float | None = None) -> float:
    """Quantile at ``prob`` of the normal (``df`` None) or Student t distribution."""
    if df is None:
        return normal_quantile(prob)
    return float(special.stdtrit(df, prob))
