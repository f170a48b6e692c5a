"""p-values, confidence intervals and multiplicity corrections.

All functions work on arrays of statistics already computed over the
rearrangements. Tail handling goes through :func:`extreme`, which maps a
statistic onto a scale where larger means more extreme: ``|v|`` for
two-tailed tests, ``v`` for right-tailed and ``-v`` for left-tailed tests.
Variance ratios use ``max(v, 1/v)`` for two-tailed tests instead.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Tail, _coerce_enum
from .errors import SEUnavailable, ValidationError

# Relative slack when comparing a rearranged statistic with the observed
# one, so that ties computed along different float paths still count.
TIE_RTOL = 1e-9
TIE_ATOL = 1e-12

SE_FAMILIES = ("t", "z")
RATIO_FAMILIES = ("f", "anova")
CORR_FAMILIES = ("r",)


@dataclass(frozen=True)
class NullDistribution:
    """Permutation distribution of a statistic.

    ``values`` is 1-D for a max-reduced (corrected) distribution and
    ``(n_draws, n_vars)`` for per-variable distributions. ``exact`` marks a
    complete enumeration, in which the observed arrangement is one of the
    draws. ``ratio`` marks variance-ratio statistics.
    """

    values: np.ndarray
    tail: Tail = Tail.TWO
    corrected: bool = False
    n_vars_joined: int = 1
    exact: bool = False
    ratio: bool = False

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.size == 0:
            raise ValidationError("null distribution is empty")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "tail", _coerce_enum(Tail, self.tail, "tail"))

    @property
    def n_draws(self) -> int:
        return self.values.shape[0]


def extreme(values, tail, ratio: bool = False) -> np.ndarray:
    """Map statistics onto the 'larger is more extreme' scale for ``tail``."""
    tail = _coerce_enum(Tail, tail, "tail")
    v = np.asarray(values, dtype=float)
    if tail is Tail.TWO:
        if ratio:
            with np.errstate(divide="ignore"):
                return np.maximum(v, 1.0 / v)
        return np.abs(v)
    if tail is Tail.RIGHT:
        return v
    return -v


def max_reduce(stat_matrix, tail, ratio: bool = False, exact: bool = False) -> NullDistribution:
    """Collapse a ``(rearrangements, variables)`` matrix to its row-wise extreme.

    Two-tailed: row maximum of ``|value|`` (``max(F, 1/F)`` for ratios);
    right-tailed: row maximum; left-tailed: row minimum. NaN columns are
    ignored.
    """
    tail = _coerce_enum(Tail, tail, "tail")
    m = np.asarray(stat_matrix, dtype=float)
    if m.ndim == 1:
        m = m[:, None]
    if m.size == 0:
        raise ValidationError("max_reduce needs a non-empty matrix")
    keep = ~np.all(np.isnan(m), axis=0)
    m = m[:, keep] if keep.any() else m
    if tail is Tail.TWO:
        values = np.fmax.reduce(extreme(m, tail, ratio), axis=1)
    elif tail is Tail.RIGHT:
        values = np.fmax.reduce(m, axis=1)
    else:
        values = np.fmin.reduce(m, axis=1)
    return NullDistribution(values, tail, corrected=True, n_vars_joined=m.shape[1], exact=exact, ratio=ratio)


def _count_at_least(obs_ext: np.ndarray, dist_ext: np.ndarray) -> np.ndarray:
    thresh = obs_ext - (TIE_ATOL + TIE_RTOL * np.abs(obs_ext))
    return np.sum(dist_ext >= thresh, axis=0)


def pvalues(observed, dist: NullDistribution) -> np.ndarray:
    """Per-variable p-values against a shared or per-variable null.

    Monte Carlo: ``(1 + #{extreme(d) >= extreme(obs)}) / (n_draws + 1)``.
    Exact enumeration: the plain proportion, since the observed arrangement
    is already among the draws. NaN observations give NaN.
    """
    obs = np.atleast_1d(np.asarray(observed, dtype=float))
    obs_ext = extreme(obs, dist.tail, dist.ratio)
    d_ext = extreme(dist.values, dist.tail, dist.ratio)
    if d_ext.ndim == 1:
        counts = _count_at_least(obs_ext[None, :], d_ext[:, None])
    else:
        if d_ext.shape[1] != obs.size:
            raise ValidationError("per-variable null does not match number of observed statistics")
        counts = _count_at_least(obs_ext[None, :], d_ext)
    n = dist.n_draws
    p = counts / n if dist.exact else (counts + 1.0) / (n + 1.0)
    return np.where(np.isnan(obs), np.nan, p)


def pvalue(observed: float, dist: NullDistribution) -> float:
    """p-value of a single observed statistic against a 1-D null."""
    if np.ndim(dist.values) != 1:
        raise ValidationError("pvalue needs a 1-D distribution; use pvalues for per-variable nulls")
    return float(pvalues([observed], dist)[0])


def percentile(values, pct: float) -> float | np.ndarray:
    """Linear-interpolation percentile (rank ``1 + pct/100 * (n-1)``) along axis 0."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise ValidationError("percentile of an empty sequence")
    if not 0.0 <= pct <= 100.0:
        raise ValidationError(f"percentile must lie in [0, 100], got {pct}")
    return np.percentile(v, pct, axis=0, method="linear")


def critical_value(dist: NullDistribution, alpha: float) -> float | np.ndarray:
    """The ``100(1-alpha)`` percentile of the extreme-transformed null."""
    d_ext = extreme(dist.values, dist.tail, dist.ratio)
    if d_ext.ndim == 2:
        d_ext = np.where(np.isnan(d_ext), -np.inf, d_ext)
    return percentile(d_ext, 100.0 * (1.0 - alpha))


def ci_from_dist(estimate, se, dist: NullDistribution, alpha: float, family: str = "t"):
    """Confidence interval implied by the permutation distribution.

    ``t``/``z``: ``estimate -/+ crit * se`` (one-sided intervals open towards
    +/- infinity). ``f``/``anova``: interval for the variance ratio,
    ``(F / crit, F * crit)`` two-tailed. ``r``: ``r -/+ crit`` clamped to
    ``[-1, 1]``. Returns ``(lower, upper)`` arrays.
    """
    tail = dist.tail
    est = np.asarray(estimate, dtype=float)
    crit = np.asarray(critical_value(dist, alpha), dtype=float)
    family = family.lower()
    with np.errstate(divide="ignore", invalid="ignore"):
        if family in SE_FAMILIES:
            se = np.asarray(se, dtype=float)
            if np.any(~(se > 0) & ~np.isnan(est)):
                raise SEUnavailable("standard error must be positive for an se-scaled interval")
            half = crit * se
            lower = est - half if tail is not Tail.LEFT else np.full_like(est - half, -np.inf)
            upper = est + half if tail is not Tail.RIGHT else np.full_like(est + half, np.inf)
        elif family in RATIO_FAMILIES:
            if tail is Tail.TWO:
                lower, upper = est / crit, est * crit
            elif tail is Tail.RIGHT:
                lower, upper = est / crit, np.full_like(est / crit, np.inf)
            else:
                # crit = -q_alpha of the ratio distribution
                upper = est / -crit
                lower = np.zeros_like(upper)
        elif family in CORR_FAMILIES:
            lower = est - crit if tail is not Tail.LEFT else np.full_like(est - crit, -1.0)
            upper = est + crit if tail is not Tail.RIGHT else np.full_like(est + crit, 1.0)
            lower, upper = np.clip(lower, -1.0, 1.0), np.clip(upper, -1.0, 1.0)
        else:
            raise SEUnavailable(f"no interval rule for statistic family {family!r}")
    return lower, upper


def adjust_bonferroni(p, m: int | None = None) -> np.ndarray:
    """Bonferroni adjustment ``min(1, m * p)``; NaNs pass through."""
    p = np.asarray(p, dtype=float)
    if m is None:
        m = int(np.sum(~np.isnan(p)))
    return np.minimum(1.0, m * p)


def adjust_holm(p) -> np.ndarray:
    """Holm step-down adjustment, returned in input order; NaNs pass through."""
    p = np.asarray(p, dtype=float)
    out = np.full_like(p, np.nan)
    ok = np.flatnonzero(~np.isnan(p))
    m = ok.size
    if m == 0:
        return out
    order = ok[np.argsort(p[ok], kind="stable")]
    scaled = p[order] * (m - np.arange(m))
    out[order] = np.minimum(1.0, np.maximum.accumulate(scaled))
    return out
