"""Permutation tests for every supported design.

Each test computes the observed statistic per variable with :mod:`kernels`,
evaluates the same statistic over every draw of a resampling plan in
vectorised blocks, and hands the resulting ``(draws, variables)`` matrix to
:mod:`inference` for p-values, intervals and multiplicity correction.

Blocks are independent, so they may be evaluated on several threads
(``threads=`` or the ``PERMSTAT_THREADS`` environment variable) without
changing the result.
"""

from __future__ import annotations

import warnings

import numpy as np

from . import kernels
from .core import (
    Correction,
    PermutationResult,
    SampleSummary,
    Tail,
    TestConfig,
    VarAssumption,
    as_matrix,
    validate_config,
)
from .errors import (
    DimensionTooSmall,
    LowPermutationCountWarning,
    ShapeMismatch,
    SigmaNonPositive,
    TailUnsupported,
    Unbalanced,
    UnequalSampleSizeWarning,
    ValidationError,
    ZeroVariance,
)
from .inference import (
    NullDistribution,
    adjust_bonferroni,
    adjust_holm,
    ci_from_dist,
    max_reduce,
    pvalues,
)
from .resample import evaluate_plan, label_plan, partition_plan, rowperm_plan, signflip_plan


def _config(cfg, **defaults) -> TestConfig:
    if cfg is None or isinstance(cfg, dict):
        merged = dict(defaults)
        merged.update({k: v for k, v in (cfg or {}).items() if v is not None})
        return validate_config(merged)
    if isinstance(cfg, TestConfig):
        # already validated once; do not repeat the low-count warning
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", LowPermutationCountWarning)
            return validate_config(cfg)
    return validate_config(cfg)


def _observe(fn, n_vars):
    """Run a per-variable kernel, collecting ZeroVariance failures."""
    values, errors = [], {}
    for v in range(n_vars):
        try:
            values.append(fn(v))
        except ZeroVariance as exc:
            values.append(None)
            errors[v] = str(exc)
    return values, errors


def _field(values, name, default=np.nan):
    out = []
    for sv in values:
        out.append(default if sv is None else getattr(sv, name))
    return out


def _df_array(values, pair: bool) -> np.ndarray:
    if pair:
        return np.array([(np.nan, np.nan) if sv is None else sv.df for sv in values], dtype=float)
    return np.array([np.nan if sv is None else sv.df for sv in values], dtype=float)


def _finalize(
    *,
    family: str,
    ci_family: str,
    stats: list,
    null: np.ndarray,
    cfg: TestConfig,
    exact: bool,
    names,
    errors: dict,
    summaries: dict,
    ratio: bool = False,
    pair_df: bool = False,
) -> PermutationResult:
    observed = np.array(_field(stats, "statistic"), dtype=float)
    estimate = np.array(_field(stats, "estimate"), dtype=float)
    se = np.array(_field(stats, "se"), dtype=float)
    df = _df_array(stats, pair_df)
    null = np.array(null, dtype=float)
    bad = np.isnan(observed)
    null[:, bad] = np.nan
    n_vars = observed.size
    valid = ~bad

    per_var = NullDistribution(null, cfg.tail, exact=exact, ratio=ratio)
    p_unc = pvalues(observed, per_var)
    ci = np.full((n_vars, 2), np.nan)
    if not valid.any():
        return PermutationResult(
            family=family, statistic=observed, df=df, p=p_unc, ci=ci, estimate=estimate, se=se,
            null_distribution=null, config=cfg, exact=exact, names=tuple(names),
            p_uncorrected=p_unc, summaries=summaries, errors=errors,
        )

    m = int(valid.sum())
    if cfg.correction is Correction.MAX:
        dist = max_reduce(null[:, valid], cfg.tail, ratio=ratio, exact=exact)
        p = pvalues(observed, dist)
        lo, hi = ci_from_dist(estimate[valid], se[valid], dist, cfg.alpha, ci_family)
        stored = dist.values
    else:
        alpha = cfg.alpha if cfg.correction is Correction.NONE else cfg.alpha / m
        sub = NullDistribution(null[:, valid], cfg.tail, exact=exact, ratio=ratio)
        lo, hi = ci_from_dist(estimate[valid], se[valid], sub, alpha, ci_family)
        if cfg.correction is Correction.NONE:
            p = p_unc
        elif cfg.correction is Correction.BONFERRONI:
            p = adjust_bonferroni(p_unc, m)
        else:
            p = adjust_holm(p_unc)
        stored = null
    ci[valid, 0], ci[valid, 1] = lo, hi
    p = np.where(valid, p, np.nan)
    return PermutationResult(
        family=family, statistic=observed, df=df, p=p, ci=ci, estimate=estimate, se=se,
        null_distribution=stored, config=cfg, exact=exact, names=tuple(names),
        p_uncorrected=p_unc, summaries=summaries, errors=errors,
    )


def _summaries(a: np.ndarray) -> tuple[SampleSummary, ...]:
    return tuple(SampleSummary.of(a[:, v]) for v in range(a.shape[1]))


def _mu_vector(mu, n_vars, what="mu") -> np.ndarray:
    mu = np.broadcast_to(np.asarray(mu, dtype=float), (n_vars,)).astype(float)
    if not np.all(np.isfinite(mu)):
        raise ValidationError(f"{what} must be finite")
    return mu


# -----------------------------------------------------------------------------
# One-sample / paired designs (sign flipping)
# -----------------------------------------------------------------------------
def _signflip_means(dev: np.ndarray):
    n = dev.shape[0]

    def block_means(signs):
        return (signs.astype(float) @ dev) / n

    return block_means


def permuttest(x, y=None, mu=0.0, cfg=None, threads=None) -> PermutationResult:
    """One-sample or paired-sample permutation t-test (sign flipping).

    With ``y`` given, the test runs on ``x - y`` (paired). ``mu`` is the null
    mean (of the differences in paired mode), scalar or one per variable.
    """
    cfg = _config(cfg)
    xv, names = as_matrix(x, "x")
    n, n_vars = xv.shape
    summaries = {"x": _summaries(xv)}
    if y is not None:
        yv, _ = as_matrix(y, "y")
        if yv.shape != xv.shape:
            raise ShapeMismatch(f"paired test needs equal shapes, got {xv.shape} and {yv.shape}")
        summaries["y"] = _summaries(yv)
        dev = xv - yv
        summaries["diff"] = _summaries(dev)
    else:
        dev = xv
    dev = dev - _mu_vector(mu, n_vars)

    stats, errors = _observe(lambda v: kernels.t_one_sample(dev[:, v], 0.0), n_vars)
    sumsq = np.sum(dev**2, axis=0)
    means = _signflip_means(dev)

    def block(signs):
        m = means(signs)
        var = np.maximum(sumsq - n * m**2, 0.0) / (n - 1)
        with np.errstate(divide="ignore", invalid="ignore"):
            return m / np.sqrt(var / n)

    plan = signflip_plan(n, cfg.n_perm, cfg.seed, cfg.exact_threshold)
    null = evaluate_plan(plan, block, n + n_vars, threads)
    return _finalize(
        family="ttest" if y is None else "ttest-paired", ci_family="t", stats=stats, null=null,
        cfg=cfg, exact=plan.exact, names=names, errors=errors, summaries=summaries,
    )


def permuztest(x, mu=0.0, sigma=1.0, cfg=None, threads=None) -> PermutationResult:
    """One-sample permutation z-test with known ``sigma`` (sign flipping)."""
    cfg = _config(cfg)
    xv, names = as_matrix(x, "x")
    n, n_vars = xv.shape
    sigma = np.broadcast_to(np.asarray(sigma, dtype=float), (n_vars,)).astype(float)
    if not np.all(sigma > 0):
        raise SigmaNonPositive(f"sigma must be positive, got {sigma.tolist()}")
    mu = _mu_vector(mu, n_vars)
    stats = [kernels.z_one_sample(xv[:, v], mu[v], sigma[v]) for v in range(n_vars)]
    dev = xv - mu
    se = sigma / np.sqrt(n)
    means = _signflip_means(dev)

    def block(signs):
        return means(signs) / se

    plan = signflip_plan(n, cfg.n_perm, cfg.seed, cfg.exact_threshold)
    null = evaluate_plan(plan, block, n + n_vars, threads)
    return _finalize(
        family="ztest", ci_family="z", stats=stats, null=null, cfg=cfg, exact=plan.exact,
        names=names, errors={}, summaries={"x": _summaries(xv)},
    )


# -----------------------------------------------------------------------------
# Two independent samples (label shuffling)
# -----------------------------------------------------------------------------
def _two_groups(x, y):
    xv, names = as_matrix(x, "x")
    yv, _ = as_matrix(y, "y")
    if xv.shape[1] != yv.shape[1]:
        raise ShapeMismatch(f"x has {xv.shape[1]} variables but y has {yv.shape[1]}")
    return xv, yv, names


def _group_moments(perm: np.ndarray, nx: int, pooled: np.ndarray, pooled_sq: np.ndarray):
    """Sums and sums of squares of pseudo-group X for a block of partitions."""
    b, total = perm.shape
    ind = np.zeros((b, total))
    ind[np.arange(b)[:, None], perm[:, :nx]] = 1.0
    return ind @ pooled, ind @ pooled_sq


def permuttest2(x, y, cfg=None, threads=None) -> PermutationResult:
    """Two-sample permutation t-test on pooled, re-partitioned observations.

    Uses Student's pooled t or Welch's t per ``cfg.var_assumption``; max
    correction across variables by default.
    """
    cfg = _config(cfg)
    xv, yv, names = _two_groups(x, y)
    nx, ny = xv.shape[0], yv.shape[0]
    n_vars = xv.shape[1]
    if nx != ny and cfg.var_assumption is VarAssumption.EQUAL:
        warnings.warn(
            f"unequal group sizes ({nx} vs {ny}) with equal-variance t: the permutation test is "
            "sensitive to variance differences when sample sizes differ",
            UnequalSampleSizeWarning,
            stacklevel=2,
        )
    stats, errors = _observe(
        lambda v: kernels.t_two_sample(xv[:, v], yv[:, v], cfg.var_assumption), n_vars
    )
    pooled = np.vstack([xv, yv])
    pooled = pooled - pooled.mean(axis=0)
    pooled_sq = pooled**2
    tot, tot_sq = pooled.sum(axis=0), pooled_sq.sum(axis=0)
    welch = cfg.var_assumption is VarAssumption.UNEQUAL

    def block(perm):
        sx, qx = _group_moments(perm, nx, pooled, pooled_sq)
        sy, qy = tot - sx, tot_sq - qx
        mx, my = sx / nx, sy / ny
        vx = np.maximum(qx - nx * mx**2, 0.0) / (nx - 1)
        vy = np.maximum(qy - ny * my**2, 0.0) / (ny - 1)
        if welch:
            se = np.sqrt(vx / nx + vy / ny)
        else:
            sp2 = ((nx - 1) * vx + (ny - 1) * vy) / (nx + ny - 2)
            se = np.sqrt(sp2 * (1.0 / nx + 1.0 / ny))
        with np.errstate(divide="ignore", invalid="ignore"):
            return (mx - my) / se

    plan = partition_plan(nx, ny, cfg.n_perm, cfg.seed, cfg.exact_threshold)
    null = evaluate_plan(plan, block, (nx + ny) * 2 + n_vars * 4, threads)
    return _finalize(
        family="ttest2", ci_family="t", stats=stats, null=null, cfg=cfg, exact=plan.exact,
        names=names, errors=errors, summaries={"x": _summaries(xv), "y": _summaries(yv)},
    )


def permuvartest2(x, y, cfg=None, threads=None) -> PermutationResult:
    """Two-sample permutation F-test of equal variances.

    Each group is centred on its own mean before pooling so that location
    differences do not register as variance differences.
    """
    cfg = _config(cfg)
    xv, yv, names = _two_groups(x, y)
    nx, ny = xv.shape[0], yv.shape[0]
    n_vars = xv.shape[1]
    stats, errors = _observe(lambda v: kernels.f_two_sample(xv[:, v], yv[:, v]), n_vars)
    pooled = np.vstack([xv - xv.mean(axis=0), yv - yv.mean(axis=0)])
    pooled_sq = pooled**2
    tot, tot_sq = pooled.sum(axis=0), pooled_sq.sum(axis=0)

    def block(perm):
        sx, qx = _group_moments(perm, nx, pooled, pooled_sq)
        sy, qy = tot - sx, tot_sq - qx
        vx = np.maximum(qx - sx**2 / nx, 0.0) / (nx - 1)
        vy = np.maximum(qy - sy**2 / ny, 0.0) / (ny - 1)
        with np.errstate(divide="ignore", invalid="ignore"):
            return vx / vy

    plan = partition_plan(nx, ny, cfg.n_perm, cfg.seed, cfg.exact_threshold)
    null = evaluate_plan(plan, block, (nx + ny) * 2 + n_vars * 4, threads)
    return _finalize(
        family="vartest2", ci_family="f", stats=stats, null=null, cfg=cfg, exact=plan.exact,
        names=names, errors=errors, summaries={"x": _summaries(xv), "y": _summaries(yv)},
        ratio=True, pair_df=True,
    )


# -----------------------------------------------------------------------------
# Correlation (row permutation of the second member of each pair)
# -----------------------------------------------------------------------------
def _unit_columns(a: np.ndarray) -> np.ndarray:
    c = a - a.mean(axis=0)
    norm = np.sqrt(np.sum(c**2, axis=0))
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(norm > 0, c / norm, np.nan)


def correlation_pairs(n_vars: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(n_vars) for j in range(i + 1, n_vars)]


def permucorr(x, y=None, kind="pearson", cfg=None, threads=None) -> PermutationResult:
    """Permutation correlation test.

    With ``y``, column ``v`` of ``x`` is correlated with column ``v`` of
    ``y``. Without it, every unordered pair of columns of ``x`` is tested
    (correlation-matrix mode). The rows of the second member of each pair are
    permuted; max correction runs across all tested pairs.
    """
    cfg = _config(cfg)
    kind = str(kind).lower()
    if kind not in kernels.CORRELATION_KINDS:
        raise ValidationError(f"unknown correlation kind {kind!r}")
    xv, names = as_matrix(x, "x", min_obs=3)
    n, n_vars = xv.shape
    tx = np.column_stack([kernels.correlation_transform(xv[:, v], kind) for v in range(n_vars)])
    zx = _unit_columns(tx)
    if y is not None:
        yv, _ = as_matrix(y, "y", min_obs=3)
        if yv.shape != xv.shape:
            raise ShapeMismatch(f"correlation needs equal shapes, got {xv.shape} and {yv.shape}")
        ty = np.column_stack([kernels.correlation_transform(yv[:, v], kind) for v in range(n_vars)])
        first, second = zx, _unit_columns(ty)
        pairs = [(v, v) for v in range(n_vars)]
        labels = names
        summaries = {"x": _summaries(xv), "y": _summaries(yv)}
        stats, errors = _observe(lambda v: kernels.correlation(xv[:, v], yv[:, v], kind), n_vars)
    else:
        if n_vars < 2:
            raise DimensionTooSmall("correlation-matrix mode needs at least 2 variables")
        pairs = correlation_pairs(n_vars)
        first = second = zx
        labels = tuple(f"{names[i]}:{names[j]}" for i, j in pairs)
        summaries = {"x": _summaries(xv)}
        stats, errors = _observe(
            lambda k: kernels.correlation(xv[:, pairs[k][0]], xv[:, pairs[k][1]], kind), len(pairs)
        )
    ii = np.array([p[0] for p in pairs])
    jj = np.array([p[1] for p in pairs])
    a = np.nan_to_num(first[:, ii])
    b = np.nan_to_num(second[:, jj])

    def block(perm):
        return np.clip(np.einsum("np,bnp->bp", a, b[perm]), -1.0, 1.0)

    plan = rowperm_plan(n, cfg.n_perm, cfg.seed, cfg.exact_threshold)
    null = evaluate_plan(plan, block, n * len(pairs) + n, threads)
    return _finalize(
        family=f"corr-{kind}", ci_family="r", stats=stats, null=null, cfg=cfg, exact=plan.exact,
        names=labels, errors=errors, summaries=summaries,
    )


# -----------------------------------------------------------------------------
# ANOVA (label shuffling across all observations)
# -----------------------------------------------------------------------------
def _anova_config(cfg) -> TestConfig:
    cfg = _config(cfg, tail="right")
    if cfg.tail is not Tail.RIGHT:
        raise TailUnsupported("ANOVA F tests are right-tailed only; pass tail='right'")
    return cfg


def _encode(labels, n: int, what: str):
    labels = np.asarray(labels)
    if labels.ndim != 1 or labels.size != n:
        raise ShapeMismatch(f"{what} must be a vector with one label per observation")
    levels, codes = np.unique(labels, return_inverse=True)
    return levels, codes.ravel()


def _code_sums(codes: np.ndarray, values: np.ndarray, n_codes: int) -> np.ndarray:
    b = codes.shape[0]
    sums = np.zeros((b, n_codes))
    for c in range(n_codes):
        sums[:, c] = (codes == c) @ values
    return sums


def permuanova1(values, group_labels, cfg=None, threads=None) -> PermutationResult:
    """One-way permutation ANOVA; group labels are shuffled over all observations."""
    cfg = _anova_config(cfg)
    v = np.asarray(values, dtype=float).ravel()
    as_matrix(v, "values")
    levels, codes = _encode(group_labels, v.size, "group_labels")
    k = levels.size
    sizes = np.bincount(codes, minlength=k)
    if k < 2:
        raise DimensionTooSmall("one-way ANOVA needs at least 2 groups")
    if sizes.min() < 2:
        raise DimensionTooSmall("every group needs at least 2 observations")
    order = np.argsort(codes, kind="stable")
    sv = v[order] - v.mean()
    groups = [v[codes == g] for g in range(k)]
    stats, errors = _observe(lambda _: kernels.anova1_f(groups), 1)
    n = v.size
    sst = np.sum(sv**2)

    def block(labels):
        sums = _code_sums(labels, sv, k)
        ssb = np.sum(sums**2 / sizes, axis=1) - sv.sum() ** 2 / n
        ssw = np.maximum(sst - ssb, 0.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            return ((ssb / (k - 1)) / (ssw / (n - k)))[:, None]

    plan = label_plan(sizes, cfg.n_perm, cfg.seed, cfg.exact_threshold)
    null = evaluate_plan(plan, block, n * (k + 1), threads)
    return _finalize(
        family="anova1", ci_family="anova", stats=stats, null=null, cfg=cfg, exact=plan.exact,
        names=("F",), errors=errors, pair_df=True, ratio=True,
        summaries={"groups": tuple(SampleSummary.of(g) for g in groups)},
    )


def permuanova2(values, factor_a, factor_b, cfg=None, threads=None) -> tuple[PermutationResult, ...]:
    """Balanced two-way permutation ANOVA.

    Observations are shuffled across all cells without restriction and the
    three F statistics (A, B, interaction) are recomputed for every shuffle.
    Returns three results, each right-tailed.
    """
    cfg = _anova_config(cfg)
    v = np.asarray(values, dtype=float).ravel()
    as_matrix(v, "values")
    levels_a, ca = _encode(factor_a, v.size, "factor_a")
    levels_b, cb = _encode(factor_b, v.size, "factor_b")
    a, b = levels_a.size, levels_b.size
    if a < 2 or b < 2:
        raise DimensionTooSmall("two-way ANOVA needs at least 2 levels per factor")
    cell = ca * b + cb
    counts = np.bincount(cell, minlength=a * b)
    if counts.min() != counts.max():
        raise Unbalanced(f"two-way ANOVA needs equal replicates per cell, got counts {counts.tolist()}")
    r = int(counts[0])
    if r < 2:
        raise DimensionTooSmall("two-way ANOVA needs at least 2 replicates per cell")
    order = np.argsort(cell, kind="stable")
    sv = v[order] - v.mean()
    grid = sv.reshape(a, b, r)
    try:
        observed = kernels.anova2_f(grid + v.mean())
        errors = {}
    except ZeroVariance as exc:
        observed = (None, None, None)
        errors = {0: str(exc)}
    n = v.size
    sst = np.sum(sv**2)
    df_e = a * b * (r - 1)

    def block(labels):
        sums = _code_sums(labels, sv, a * b).reshape(-1, a, b)
        m = sums / r
        grand = m.mean(axis=(1, 2))[:, None, None]
        ma = m.mean(axis=2, keepdims=True)
        mb = m.mean(axis=1, keepdims=True)
        ss_a = b * r * np.sum((ma - grand) ** 2, axis=(1, 2))
        ss_b = a * r * np.sum((mb - grand) ** 2, axis=(1, 2))
        ss_ab = r * np.sum((m - ma - mb + grand) ** 2, axis=(1, 2))
        ss_cells = r * np.sum((m - grand) ** 2, axis=(1, 2))
        ms_e = np.maximum(sst - ss_cells, 0.0) / df_e
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.column_stack([
                ss_a / (a - 1) / ms_e,
                ss_b / (b - 1) / ms_e,
                ss_ab / ((a - 1) * (b - 1)) / ms_e,
            ])

    plan = label_plan((r,) * (a * b), cfg.n_perm, cfg.seed, cfg.exact_threshold)
    null = evaluate_plan(plan, block, n * (a * b + 1), threads)
    results = []
    for idx, effect in enumerate(("A", "B", "AB")):
        results.append(
            _finalize(
                family=f"anova2-{effect}", ci_family="anova", stats=[observed[idx]],
                null=null[:, idx:idx + 1], cfg=cfg, exact=plan.exact, names=(effect,),
                errors=errors, pair_df=True, ratio=True, summaries={},
            )
        )
    return tuple(results)
