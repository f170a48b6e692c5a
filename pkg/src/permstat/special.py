"""Distribution functions for the parametric baselines.

Regularized incomplete beta via a modified-Lentz continued fraction, with a
Stirling-corrected log-beta so that large degrees of freedom keep full
precision; inverse normal via Acklam's rational approximation polished by
one Halley step. Only :mod:`math` and numpy are used.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError

_LN_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
_SQRT2 = math.sqrt(2.0)
_MAX_ITER = 20000
_EPS = 1e-16
_TINY = 1e-300


def _stirling_corr(x: float) -> float:
    """lgamma(x) minus its Stirling approximation, for x >= 10."""
    x2 = 1.0 / (x * x)
    return (
        1.0 / 12.0
        - x2 * (1.0 / 360.0 - x2 * (1.0 / 1260.0 - x2 * (1.0 / 1680.0 - x2 * (1.0 / 1188.0))))
    ) / x


def lbeta(a: float, b: float) -> float:
    """log B(a, b) without the cancellation of a plain lgamma sum."""
    p, q = min(a, b), max(a, b)
    if p <= 0:
        raise DomainError("lbeta needs positive arguments")
    if q < 10:
        return math.lgamma(p) + math.lgamma(q) - math.lgamma(p + q)
    corr = _stirling_corr(q) - _stirling_corr(p + q)
    if p < 10:
        return (
            math.lgamma(p)
            + corr
            - (q - 0.5) * math.log1p(p / q)
            - p * math.log(p + q)
            + p
        )
    return (
        -0.5 * math.log(q)
        + _LN_SQRT_2PI
        + _stirling_corr(p)
        + corr
        + (p - 0.5) * math.log(p / (p + q))
        + q * math.log1p(-p / (p + q))
    )


def _betacf(a: float, b: float, x: float) -> float:
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, _MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise DomainError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def betainc(a: float, b: float, x: float, y: float | None = None) -> float:
    """Regularized incomplete beta I_x(a, b).

    ``y`` may supply ``1 - x`` computed without rounding, which matters when
    ``x`` is close to 1.
    """
    if a <= 0 or b <= 0:
        raise DomainError("betainc needs a > 0 and b > 0")
    if y is None:
        y = 1.0 - x
    if x < 0 or y < 0:
        raise DomainError("betainc needs 0 <= x <= 1")
    if x == 0:
        return 0.0
    if y == 0:
        return 1.0
    log_front = a * math.log(x) + b * math.log(y) - lbeta(a, b)
    if x < (a + 1.0) / (a + b + 2.0):
        return math.exp(log_front) * _betacf(a, b, x) / a
    return 1.0 - math.exp(log_front) * _betacf(b, a, y) / b


def _check_df(df):
    if not df > 0:
        raise DomainError(f"degrees of freedom must be positive, got {df}")


def t_cdf(t: float, df: float) -> float:
    """Student t cumulative distribution function."""
    _check_df(df)
    t = float(t)
    if math.isnan(t):
        raise DomainError("t is NaN")
    if t == 0:
        return 0.5
    if math.isinf(t):
        return 1.0 if t > 0 else 0.0
    t2 = t * t
    # P(|T| > |t|) / 2
    half_tail = 0.5 * betainc(0.5 * df, 0.5, df / (df + t2), t2 / (df + t2))
    return 1.0 - half_tail if t > 0 else half_tail


def t_sf(t: float, df: float) -> float:
    return t_cdf(-t, df)


def f_cdf(f: float, df1: float, df2: float) -> float:
    """F distribution cumulative distribution function."""
    _check_df(df1)
    _check_df(df2)
    f = float(f)
    if f <= 0:
        return 0.0
    if math.isinf(f):
        return 1.0
    denom = df1 * f + df2
    return betainc(0.5 * df1, 0.5 * df2, df1 * f / denom, df2 / denom)


def f_sf(f: float, df1: float, df2: float) -> float:
    _check_df(df1)
    _check_df(df2)
    f = float(f)
    if f <= 0:
        return 1.0
    if math.isinf(f):
        return 0.0
    denom = df1 * f + df2
    return betainc(0.5 * df2, 0.5 * df1, df2 / denom, df1 * f / denom)


def norm_cdf(z: float) -> float:
    return 0.5 * math.erfc(-z / _SQRT2)


def norm_sf(z: float) -> float:
    return 0.5 * math.erfc(z / _SQRT2)


# Acklam's coefficients
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


def _norm_inv_lower(p: float) -> float:
    # p in (0, 0.5]
    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        x = (((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]) / (
            (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0
        )
    else:
        q = p - 0.5
        r = q * q
        x = (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q / (
            ((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0
        )
    # Halley refinement
    e = norm_cdf(x) - p
    u = e * math.sqrt(2.0 * math.pi) * math.exp(0.5 * x * x)
    return x - u / (1.0 + 0.5 * x * u)


def norm_inv(p: float) -> float:
    """Standard normal quantile function."""
    p = float(p)
    if not 0.0 < p < 1.0:
        raise DomainError(f"norm_inv needs 0 < p < 1, got {p}")
    if p > 0.5:
        return -_norm_inv_lower(1.0 - p)
    return _norm_inv_lower(p)


def norm_inv_array(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    return np.array([norm_inv(v) for v in p.ravel()]).reshape(p.shape)
