"""Test statistics on a single variable.

These are the reference (scalar) definitions. The permutation engine uses
vectorised equivalents over whole blocks of rearrangements; both must agree
on the observed data.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import SampleSummary, VarAssumption, _coerce_enum
from .errors import (
    DimensionTooSmall,
    ShapeMismatch,
    SigmaNonPositive,
    Unbalanced,
    ValidationError,
    ZeroVariance,
)
from .special import norm_inv_array


@dataclass(frozen=True)
class StatValue:
    """A test statistic with its degrees of freedom and standard error.

    ``df`` is a float, a ``(df1, df2)`` pair for F statistics, or NaN where
    undefined (z). ``se`` is NaN for families that do not divide by one.
    """

    statistic: float
    df: float | tuple[float, float]
    se: float
    estimate: float


def _vec(x, name="x", min_n=1) -> np.ndarray:
    a = np.asarray(x, dtype=float).ravel()
    if a.size < min_n:
        raise DimensionTooSmall(f"{name} needs at least {min_n} observations, got {a.size}")
    return a


def summary(sample) -> SampleSummary:
    """Size, mean and sample standard deviation (n-1 denominator)."""
    return SampleSummary.of(sample)


def t_from_summaries(sx: SampleSummary, sy: SampleSummary, var_assumption="equal") -> StatValue:
    """Two-sample t statistic from group summaries."""
    var_assumption = _coerce_enum(VarAssumption, var_assumption, "variance assumption")
    nx, ny = sx.n, sy.n
    if nx < 2 or ny < 2:
        raise DimensionTooSmall("two-sample t needs at least 2 observations per group")
    vx, vy = sx.var, sy.var
    diff = sx.mean - sy.mean
    if var_assumption is VarAssumption.EQUAL:
        df = nx + ny - 2.0
        sp2 = ((nx - 1) * vx + (ny - 1) * vy) / df
        se = np.sqrt(sp2 * (1.0 / nx + 1.0 / ny))
    else:
        ax, ay = vx / nx, vy / ny
        se = np.sqrt(ax + ay)
        df = (ax + ay) ** 2 / (ax**2 / (nx - 1) + ay**2 / (ny - 1)) if se > 0 else np.nan
    if not se > 0:
        raise ZeroVariance("two-sample t: standard error is zero")
    return StatValue(float(diff / se), float(df), float(se), float(diff))


def t_two_sample(x, y, var_assumption="equal") -> StatValue:
    """Student (pooled) or Welch two-sample t statistic; estimate is ``mean(x) - mean(y)``."""
    x, y = _vec(x, "x", 2), _vec(y, "y", 2)
    return t_from_summaries(SampleSummary.of(x), SampleSummary.of(y), var_assumption)


def t_one_sample(x, mu=0.0) -> StatValue:
    """One-sample t against ``mu``. For a paired test pass ``x - y``."""
    x = _vec(x, "x", 2)
    s = SampleSummary.of(x)
    se = s.sd / np.sqrt(s.n)
    if not se > 0:
        raise ZeroVariance("one-sample t: sample has zero variance")
    est = s.mean - mu
    return StatValue(float(est / se), float(s.n - 1), float(se), float(est))


def f_two_sample(x, y) -> StatValue:
    """Variance ratio ``var(x) / var(y)`` with ``(nx-1, ny-1)`` df."""
    x, y = _vec(x, "x", 2), _vec(y, "y", 2)
    vx, vy = np.var(x, ddof=1), np.var(y, ddof=1)
    if not vy > 0:
        raise ZeroVariance("F test: y has zero variance")
    f = vx / vy
    return StatValue(float(f), (float(x.size - 1), float(y.size - 1)), np.nan, float(f))


def z_one_sample(x, mu=0.0, sigma=1.0) -> StatValue:
    if not sigma > 0:
        raise SigmaNonPositive(f"sigma must be positive, got {sigma}")
    x = _vec(x, "x", 1)
    se = sigma / np.sqrt(x.size)
    est = x.mean() - mu
    return StatValue(float(est / se), np.nan, float(se), float(est))


def rank_transform(x) -> np.ndarray:
    """Ranks starting at 1, ties replaced by their average rank."""
    x = _vec(x, "x", 1)
    order = np.argsort(x, kind="stable")
    sx = x[order]
    # boundaries of tie blocks in sorted order
    starts = np.flatnonzero(np.r_[True, sx[1:] != sx[:-1]])
    ends = np.r_[starts[1:], sx.size]
    block_rank = (starts + ends + 1) / 2.0
    ranks = np.empty(x.size)
    ranks[order] = np.repeat(block_rank, ends - starts)
    return ranks


def rankit_scores(n: int) -> np.ndarray:
    """Normal scores ``Phi^-1((i - 0.5) / n)`` for ``i = 1..n``."""
    if n < 2:
        raise DimensionTooSmall("rankit scores need n >= 2")
    scores = norm_inv_array((np.arange(1, n + 1) - 0.5) / n)
    # enforce exact antisymmetry
    return 0.5 * (scores - scores[::-1])


def rankit_transform(x) -> np.ndarray:
    x = _vec(x, "x", 1)
    return norm_inv_array((rank_transform(x) - 0.5) / x.size)


CORRELATION_KINDS = ("pearson", "spearman", "rankit")


def correlation_transform(x, kind: str) -> np.ndarray:
    kind = str(kind).lower()
    if kind == "pearson":
        return _vec(x)
    if kind == "spearman":
        return rank_transform(x)
    if kind == "rankit":
        return rankit_transform(x)
    raise ValidationError(f"unknown correlation kind {kind!r}; expected one of {CORRELATION_KINDS}")


def _pearson(a: np.ndarray, b: np.ndarray) -> float:
    a = a - a.mean()
    b = b - b.mean()
    saa, sbb = np.dot(a, a), np.dot(b, b)
    if not (saa > 0 and sbb > 0):
        raise ZeroVariance("correlation: a variable is constant")
    r = np.dot(a, b) / np.sqrt(saa * sbb)
    return float(np.clip(r, -1.0, 1.0))


def correlation(x, y, kind: str = "pearson") -> StatValue:
    """Pearson, Spearman (Pearson on midranks) or rankit (Pearson on normal scores)."""
    x, y = _vec(x, "x", 3), _vec(y, "y", 3)
    if x.size != y.size:
        raise ShapeMismatch("correlation needs equal-length vectors")
    r = _pearson(correlation_transform(x, kind), correlation_transform(y, kind))
    return StatValue(r, float(x.size - 2), np.nan, r)


def anova1_f(groups) -> StatValue:
    """One-way ANOVA F with ``(k-1, N-k)`` df; estimate is F."""
    groups = [_vec(g, "group", 2) for g in groups]
    if len(groups) < 2:
        raise DimensionTooSmall("one-way ANOVA needs at least 2 groups")
    allv = np.concatenate(groups)
    grand = allv.mean()
    k, n = len(groups), allv.size
    ss_between = sum(g.size * (g.mean() - grand) ** 2 for g in groups)
    ss_within = sum(((g - g.mean()) ** 2).sum() for g in groups)
    ms_within = ss_within / (n - k)
    if not ms_within > 0:
        raise ZeroVariance("one-way ANOVA: within-group variance is zero")
    f = (ss_between / (k - 1)) / ms_within
    return StatValue(float(f), (float(k - 1), float(n - k)), np.nan, float(f))


def _as_grid(cells) -> np.ndarray:
    if isinstance(cells, np.ndarray) and cells.ndim == 3:
        grid = cells.astype(float)
    else:
        rows = [[_vec(c, "cell", 1) for c in row] for row in cells]
        sizes = {c.size for row in rows for c in row}
        if len({len(row) for row in rows}) != 1:
            raise Unbalanced("two-way ANOVA grid rows have different numbers of cells")
        if len(sizes) != 1:
            raise Unbalanced(f"two-way ANOVA needs equal replicates per cell, got sizes {sorted(sizes)}")
        grid = np.array(rows, dtype=float)
    if grid.shape[0] < 2 or grid.shape[1] < 2:
        raise DimensionTooSmall("two-way ANOVA needs at least 2 levels per factor")
    if grid.shape[2] < 2:
        raise DimensionTooSmall("two-way ANOVA needs at least 2 replicates per cell")
    return grid


def anova2_f(cells) -> tuple[StatValue, StatValue, StatValue]:
    """Balanced two-way fixed-effects ANOVA.

    ``cells`` is an ``a x b`` grid of replicate vectors (or an array of
    shape ``(a, b, r)``). Returns the F statistics for factor A, factor B and
    their interaction.
    """
    grid = _as_grid(cells)
    a, b, r = grid.shape
    cell = grid.mean(axis=2)
    grand = cell.mean()
    ma = cell.mean(axis=1)
    mb = cell.mean(axis=0)
    ss_a = b * r * ((ma - grand) ** 2).sum()
    ss_b = a * r * ((mb - grand) ** 2).sum()
    ss_ab = r * ((cell - ma[:, None] - mb[None, :] + grand) ** 2).sum()
    ss_e = ((grid - cell[:, :, None]) ** 2).sum()
    df_e = a * b * (r - 1)
    ms_e = ss_e / df_e
    if not ms_e > 0:
        raise ZeroVariance("two-way ANOVA: error variance is zero")
    out = []
    for ss, df in ((ss_a, a - 1), (ss_b, b - 1), (ss_ab, (a - 1) * (b - 1))):
        f = (ss / df) / ms_e
        out.append(StatValue(float(f), (float(df), float(df_e)), np.nan, float(f)))
    return tuple(out)
