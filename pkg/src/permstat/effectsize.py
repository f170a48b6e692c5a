"""Effect sizes with percentile bootstrap confidence intervals.

Standardised mean differences (Cohen's d, Glass' delta) are multiplied by
the small-sample bias factor ``1 - 3 / (4n - 9)`` by default, both the
estimate and the interval bounds; a corrected Cohen's d is reported as
Hedges' g.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import (
    MIN_N_PERM,
    SEED_MAX,
    EffectSizeResult,
    VarAssumption,
    _coerce_enum,
    as_matrix,
)
from .errors import (
    AlphaOutOfRange,
    DimensionTooSmall,
    PermCountTooLow,
    SampleTooSmall,
    SeedOutOfRange,
    ShapeMismatch,
    ValidationError,
    ZeroVariance,
)
from .inference import percentile
from .resample import bootstrap_plan, evaluate_plan


class EffectKind(str, Enum):
    COHEN = "cohen"
    GLASS = "glass"
    CLIFF = "cliff"
    MEANDIFF = "meandiff"
    MEDIANDIFF = "mediandiff"


STANDARDIZED = (EffectKind.COHEN, EffectKind.GLASS)

_KIND_ALIASES = {
    "hedges": "cohen",
    "d": "cohen",
    "delta": "glass",
    "cliffs": "cliff",
    "mean": "meandiff",
    "unstandardized": "meandiff",
    "unstandardised": "meandiff",
    "median": "mediandiff",
}


def _kind(kind) -> EffectKind:
    if isinstance(kind, EffectKind):
        return kind
    key = str(kind).strip().lower().replace("_", "").replace("'", "")
    return _coerce_enum(EffectKind, _KIND_ALIASES.get(key, key), "effect kind")


@dataclass(frozen=True)
class BootConfig:
    n_boot: int = 10000
    seed: int = 0
    alpha: float = 0.05
    paired: bool = False
    var_assumption: VarAssumption = VarAssumption.EQUAL
    bias_correct: bool = True
    control: str = "y"


def validate_boot_config(cfg=None, **overrides) -> BootConfig:
    if cfg is None:
        values = {}
    elif isinstance(cfg, BootConfig):
        values = dict(cfg.__dict__)
    else:
        values = dict(cfg)
    values.update(overrides)
    values = {k: v for k, v in values.items() if v is not None}
    base = BootConfig()
    unknown = set(values) - set(base.__dict__)
    if unknown:
        raise ValidationError(f"unknown bootstrap configuration fields: {sorted(unknown)}")
    n_boot = int(values.get("n_boot", base.n_boot))
    if n_boot < MIN_N_PERM:
        raise PermCountTooLow(f"n_boot={n_boot} is below the floor of {MIN_N_PERM}")
    alpha = float(values.get("alpha", base.alpha))
    if not 0.0 < alpha < 1.0:
        raise AlphaOutOfRange(f"alpha={alpha} must lie strictly between 0 and 1")
    seed = values.get("seed", base.seed)
    if isinstance(seed, bool) or int(seed) != seed or not 0 <= int(seed) <= SEED_MAX:
        raise SeedOutOfRange(f"seed={seed!r} must be an unsigned 64-bit integer")
    control = str(values.get("control", base.control)).lower()
    if control not in ("x", "y"):
        raise ValidationError("control must be 'x' or 'y'")
    return BootConfig(
        n_boot=n_boot,
        seed=int(seed),
        alpha=alpha,
        paired=bool(values.get("paired", base.paired)),
        var_assumption=_coerce_enum(
            VarAssumption, values.get("var_assumption", base.var_assumption), "variance assumption"
        ),
        bias_correct=bool(values.get("bias_correct", base.bias_correct)),
        control=control,
    )


def bias_factor(n_total: int) -> float:
    """Small-sample correction factor ``1 - 3 / (4 n - 9)``."""
    if n_total < 3:
        raise SampleTooSmall(f"bias correction needs n >= 3, got {n_total}")
    return 1.0 - 3.0 / (4.0 * n_total - 9.0)


def cliffs_d(x, y) -> float:
    """Dominance statistic ``(#{x > y} - #{x < y}) / (nx * ny)``."""
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.size < 1 or y.size < 1:
        raise DimensionTooSmall("Cliff's d needs non-empty samples")
    return float(np.sign(x[:, None] - y[None, :]).mean())


# -----------------------------------------------------------------------------
# Batched effect computation along the last axis
# -----------------------------------------------------------------------------
def _batch_effect(kind, xs, ys, paired, var_assumption, control):
    """Effect sizes over the last axis; returns (values, degenerate mask)."""
    ok = None
    if ys is None:
        if kind is EffectKind.COHEN:
            sd = np.std(xs, axis=-1, ddof=1)
            ok = sd > 0
            with np.errstate(divide="ignore", invalid="ignore"):
                val = np.mean(xs, axis=-1) / sd
        elif kind is EffectKind.MEANDIFF:
            val = np.mean(xs, axis=-1)
        elif kind is EffectKind.MEDIANDIFF:
            val = np.median(xs, axis=-1)
        else:
            raise ValidationError(f"{kind.value} needs two samples")
    elif kind is EffectKind.CLIFF:
        val = np.sign(xs[..., :, None] - ys[..., None, :]).mean(axis=(-2, -1))
    elif kind is EffectKind.MEANDIFF:
        val = np.mean(xs, axis=-1) - np.mean(ys, axis=-1)
    elif kind is EffectKind.MEDIANDIFF:
        val = np.median(xs, axis=-1) - np.median(ys, axis=-1)
    else:
        diff = np.mean(xs, axis=-1) - np.mean(ys, axis=-1)
        if kind is EffectKind.GLASS:
            sd = np.std(xs if control == "x" else ys, axis=-1, ddof=1)
        elif paired:
            sd = np.std(xs - ys, axis=-1, ddof=1)
        else:
            vx = np.var(xs, axis=-1, ddof=1)
            vy = np.var(ys, axis=-1, ddof=1)
            if var_assumption is VarAssumption.EQUAL:
                nx, ny = xs.shape[-1], ys.shape[-1]
                sd = np.sqrt(((nx - 1) * vx + (ny - 1) * vy) / (nx + ny - 2))
            else:
                sd = np.sqrt((vx + vy) / 2.0)
        ok = sd > 0
        with np.errstate(divide="ignore", invalid="ignore"):
            val = diff / sd
    if ok is None:
        ok = np.ones(np.shape(val), dtype=bool)
    return val, ok


def effect_point(x, y=None, kind="cohen", paired=False, var_assumption="equal", control="y") -> float:
    """Point estimate of an effect size for one variable (no bias correction).

    Cohen's d uses the pooled weighted SD under equal variances and
    ``sqrt((sx^2 + sy^2) / 2)`` otherwise; paired Cohen's d standardises the
    mean difference by the SD of the differences. Glass' delta uses the SD of
    the control sample (``y`` unless ``control='x'``).
    """
    kind = _kind(kind)
    var_assumption = _coerce_enum(VarAssumption, var_assumption, "variance assumption")
    xs = np.asarray(x, dtype=float).ravel()
    ys = None if y is None else np.asarray(y, dtype=float).ravel()
    min_n = 1 if kind is EffectKind.CLIFF else 2
    if xs.size < min_n or (ys is not None and ys.size < min_n):
        raise DimensionTooSmall(f"{kind.value} needs at least {min_n} observations per sample")
    if paired and ys is not None and xs.size != ys.size:
        raise ShapeMismatch("paired samples must have equal length")
    val, ok = _batch_effect(kind, xs, ys, paired, var_assumption, control)
    if not ok:
        raise ZeroVariance(f"{kind.value}: standardiser is zero")
    return float(val)


def _label(kind: EffectKind, corrected: bool) -> str:
    if kind is EffectKind.COHEN:
        return "hedges_g" if corrected else "cohen_d"
    if kind is EffectKind.GLASS:
        return "glass_delta_corrected" if corrected else "glass_delta"
    return {
        EffectKind.CLIFF: "cliff_d",
        EffectKind.MEANDIFF: "mean_difference",
        EffectKind.MEDIANDIFF: "median_difference",
    }[kind]


def booteffectsize(x, y=None, kind="cohen", cfg=None, threads=None) -> EffectSizeResult:
    """Effect size per variable with a percentile bootstrap interval.

    Independent samples are resampled within each group; paired samples
    (``cfg.paired``) and single samples resample observation indices. A
    resample whose standardiser is zero is discarded and replaced by a later
    draw, up to ``10 * n_boot`` draws in total.
    """
    kind = _kind(kind)
    cfg = validate_boot_config(cfg)
    xv, names = as_matrix(x, "x")
    n_vars = xv.shape[1]
    yv = None
    if y is not None:
        yv, _ = as_matrix(y, "y")
        if yv.shape[1] != n_vars:
            raise ShapeMismatch(f"x has {n_vars} variables but y has {yv.shape[1]}")
        if cfg.paired and yv.shape != xv.shape:
            raise ShapeMismatch(f"paired samples need equal shapes, got {xv.shape} and {yv.shape}")
    elif kind in (EffectKind.GLASS, EffectKind.CLIFF):
        raise ValidationError(f"{kind.value} needs two samples")

    one_group = yv is None or cfg.paired
    nx = xv.shape[0]
    ny = nx if yv is None else yv.shape[0]
    n_total = nx if one_group else nx + ny
    corrected = cfg.bias_correct and kind in STANDARDIZED
    factor = bias_factor(n_total) if corrected else 1.0

    # point estimates
    point = np.full(n_vars, np.nan)
    errors: dict[int, str] = {}
    for v in range(n_vars):
        try:
            point[v] = effect_point(
                xv[:, v], None if yv is None else yv[:, v], kind, cfg.paired, cfg.var_assumption, cfg.control
            )
        except ZeroVariance as exc:
            errors[v] = str(exc)

    # bootstrap
    if one_group:
        plan = bootstrap_plan(10 * cfg.n_boot, cfg.seed, paired=True, n=nx)
    else:
        plan = bootstrap_plan(10 * cfg.n_boot, cfg.seed, paired=False, nx=nx, ny=ny)
    xt = xv.T
    yt = None if yv is None else yv.T

    def block(idx):
        if one_group:
            xs = xt[:, idx].transpose(1, 0, 2)
            ys = None if yt is None else yt[:, idx].transpose(1, 0, 2)
        else:
            xs = xt[:, idx[:, :nx]].transpose(1, 0, 2)
            ys = yt[:, idx[:, nx:]].transpose(1, 0, 2)
        val, ok = _batch_effect(kind, xs, ys, cfg.paired, cfg.var_assumption, cfg.control)
        return np.stack([val, ok.astype(float)], axis=-1)

    cost = n_vars * (nx * ny if kind is EffectKind.CLIFF else nx + ny) + nx + ny
    boot = np.full((cfg.n_boot, n_vars), np.nan)
    chunks = []
    start = 0
    need = cfg.n_boot
    while need > 0 and start < plan.n_draws:
        stop = min(plan.n_draws, start + need)
        chunks.append(evaluate_plan(plan, block, cost, threads, start=start, stop=stop))
        start = stop
        ok_counts = np.concatenate(chunks)[..., 1].sum(axis=0)
        ok_counts[list(errors)] = cfg.n_boot
        need = int(cfg.n_boot - ok_counts.min())
    draws = np.concatenate(chunks)
    ci = np.full((n_vars, 2), np.nan)
    for v in range(n_vars):
        if v in errors:
            continue
        good = draws[draws[:, v, 1] > 0, v, 0]
        if good.size < cfg.n_boot:
            errors[v] = f"only {good.size} non-degenerate resamples in {plan.n_draws} draws"
            continue
        boot[:, v] = good[: cfg.n_boot]
        ci[v] = (
            percentile(boot[:, v], 100.0 * cfg.alpha / 2.0),
            percentile(boot[:, v], 100.0 * (1.0 - cfg.alpha / 2.0)),
        )
    return EffectSizeResult(
        effect=point * factor,
        ci=ci * factor,
        kind=kind.value,
        label=_label(kind, corrected),
        correction_factor=np.full(n_vars, factor),
        n_boot=cfg.n_boot,
        seed=cfg.seed,
        alpha=cfg.alpha,
        paired=cfg.paired,
        names=names,
        uncorrected=point,
        boot_distribution=boot,
        errors=errors,
    )
