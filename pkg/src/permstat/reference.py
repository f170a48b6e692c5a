"""Independent oracles and baselines.

* :func:`exact_test` enumerates every rearrangement with plain loops over
  the scalar kernels. It shares no code with the vectorised engine beyond
  the kernel definitions, so it can validate the engine's exact and Monte
  Carlo p-values.
* Parametric distribution functions (re-exported from :mod:`special`).
* :func:`fwer_sim` / :func:`fwer_sweep`, a Monte Carlo harness for
  family-wise error rate and power of the multiplicity corrections.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import Correction, _coerce_enum, validate_config
from .errors import LowPermutationCountWarning, TooLargeToEnumerate, ValidationError, ZeroVariance
from .inference import adjust_bonferroni, adjust_holm
from .permtests import permuttest2
from .special import f_cdf, f_sf, norm_cdf, norm_inv, norm_sf, t_cdf, t_sf  # noqa: F401

MAX_ENUMERATION = 10**6
FAMILIES = ("t", "t2", "f", "z", "corr", "anova1")


def _safe_stat(fn):
    """Statistic of a rearrangement; a zero denominator gives +/-inf or NaN."""
    try:
        return fn().statistic
    except ZeroVariance:
        return math.nan


def _safe_mean_ratio(dev):
    # sign-flipped sample with zero spread: infinite t unless the mean is 0 too
    try:
        return kernels.t_one_sample(dev, 0.0).statistic
    except ZeroVariance:
        m = float(np.mean(dev))
        return math.copysign(math.inf, m) if m != 0 else math.nan


def _safe_t2(x, y, var_assumption):
    try:
        return kernels.t_two_sample(x, y, var_assumption).statistic
    except ZeroVariance:
        d = float(np.mean(x) - np.mean(y))
        return math.copysign(math.inf, d) if d != 0 else math.nan


def _magnitude(v: float, tail: str, ratio: bool) -> float:
    if tail == "two":
        if ratio:
            return max(v, 1.0 / v) if v != 0 else math.inf
        return abs(v)
    return v if tail == "right" else -v


def exact_test(
    x,
    y=None,
    mu: float = 0.0,
    family: str = "t2",
    tail: str = "two",
    *,
    sigma: float = 1.0,
    var_assumption: str = "equal",
    kind: str = "pearson",
    labels=None,
) -> float:
    """Exact permutation p-value by brute-force enumeration.

    Parameters
    ----------
    x, y : array_like
        1-D samples. For ``family='t'`` a given ``y`` makes the test paired;
        for ``'anova1'`` ``x`` holds all values and ``labels`` the groups.
    family : {'t', 't2', 'f', 'z', 'corr', 'anova1'}
    tail : {'two', 'right', 'left'}

    Returns
    -------
    float
        Fraction of rearrangements whose statistic is at least as extreme as
        the observed one (the observed arrangement included).
    """
    from .core import Tail

    tail = _coerce_enum(Tail, tail, "tail").value
    x = np.asarray(x, dtype=float).ravel()
    if family not in FAMILIES:
        raise ValidationError(f"unknown family {family!r}; expected one of {FAMILIES}")
    ratio = family in ("f", "anova1")
    if family == "anova1" and tail != "right":
        raise ValidationError("the ANOVA oracle is right-tailed only")

    if family in ("t", "z"):
        dev = x - (0.0 if y is None else np.asarray(y, dtype=float).ravel()) - mu
        _check_size(2 ** dev.size)
        if family == "t":
            stat = lambda d: _safe_mean_ratio(d)  # noqa: E731
        else:
            stat = lambda d: kernels.z_one_sample(d, 0.0, sigma).statistic  # noqa: E731
        observed = stat(dev)
        values = [stat(dev * np.array(s)) for s in itertools.product((1.0, -1.0), repeat=dev.size)]
    elif family in ("t2", "f"):
        y = np.asarray(y, dtype=float).ravel()
        nx = x.size
        if family == "f":
            pooled = np.concatenate([x - x.mean(), y - y.mean()])
            stat = lambda a, b: _safe_stat(lambda: kernels.f_two_sample(a, b))  # noqa: E731
        else:
            pooled = np.concatenate([x, y])
            stat = lambda a, b: _safe_t2(a, b, var_assumption)  # noqa: E731
        _check_size(math.comb(pooled.size, nx))
        observed = stat(x, y) if family == "t2" else kernels.f_two_sample(x, y).statistic
        values = []
        everyone = set(range(pooled.size))
        for comb in itertools.combinations(range(pooled.size), nx):
            rest = sorted(everyone - set(comb))
            values.append(stat(pooled[list(comb)], pooled[rest]))
    elif family == "corr":
        y = np.asarray(y, dtype=float).ravel()
        _check_size(math.factorial(y.size))
        observed = kernels.correlation(x, y, kind).statistic
        values = [
            _safe_stat(lambda p=p: kernels.correlation(x, y[list(p)], kind))
            for p in itertools.permutations(range(y.size))
        ]
    else:
        labels = np.asarray(labels)
        if labels.size != x.size:
            raise ValidationError("labels must match the values")
        levels = sorted(set(labels.tolist()))
        sizes = [int(np.sum(labels == g)) for g in levels]
        count = math.factorial(labels.size)
        for k in sizes:
            count //= math.factorial(k)
        _check_size(count)
        arrangements = list(_arrangements(levels, sizes, labels.size))

        def fstat(lab):
            lab = np.asarray(lab)
            return _safe_stat(lambda: kernels.anova1_f([x[lab == g] for g in levels]))

        observed = fstat(labels)
        values = [fstat(a) for a in arrangements]

    obs = _magnitude(observed, tail, ratio)
    thresh = obs - (1e-12 + 1e-9 * abs(obs))
    hits = sum(1 for v in values if not math.isnan(v) and _magnitude(v, tail, ratio) >= thresh)
    return hits / len(values)


def _arrangements(levels, sizes, n):
    """Every distinct labelling: choose positions for each level in turn."""

    def rec(free, k):
        if k == len(levels) - 1:
            yield {i: levels[k] for i in free}
            return
        for chosen in itertools.combinations(free, sizes[k]):
            rest = [i for i in free if i not in chosen]
            for tail in rec(rest, k + 1):
                tail.update({i: levels[k] for i in chosen})
                yield tail

    for assign in rec(list(range(n)), 0):
        yield [assign[i] for i in range(n)]


def _check_size(count: int):
    if count > MAX_ENUMERATION:
        raise TooLargeToEnumerate(f"{count} rearrangements exceed the enumeration limit of {MAX_ENUMERATION}")


def parametric_t2_pvalue(t: float, df: float, tail: str = "two") -> float:
    """p-value of a t statistic under the Student t distribution."""
    if tail == "two":
        return min(1.0, 2.0 * t_sf(abs(t), df))
    return t_sf(t, df) if tail == "right" else t_cdf(t, df)


# -----------------------------------------------------------------------------
# FWER / power harness
# -----------------------------------------------------------------------------
@dataclass(frozen=True)
class FwerReport:
    n_sims: int
    n_vars: int
    n_obs: int
    alpha: float
    correction: Correction
    empirical_fwer: float
    empirical_power: float | None
    mc_stderr: float
    effect_shift: float = 0.0
    n_effect_vars: int = 0
    n_perm: int = 1000
    seed: int = 0

    def to_dict(self) -> dict:
        return {
            "n_sims": self.n_sims,
            "n_vars": self.n_vars,
            "n_obs": self.n_obs,
            "alpha": self.alpha,
            "correction": self.correction.value,
            "empirical_fwer": self.empirical_fwer,
            "empirical_power": self.empirical_power,
            "mc_stderr": self.mc_stderr,
            "effect_shift": self.effect_shift,
            "n_effect_vars": self.n_effect_vars,
            "n_perm": self.n_perm,
            "seed": self.seed,
        }


def simulate_dataset(seed: int, sim: int, n_obs: int, n_vars: int, effect_shift: float = 0.0,
                     n_effect_vars: int = 0, equicorrelation: float = 0.0):
    """Two standard-normal groups; Y's first ``n_effect_vars`` columns shifted by ``-effect_shift``."""
    rng = np.random.default_rng([seed, sim])
    x = rng.standard_normal((n_obs, n_vars))
    y = rng.standard_normal((n_obs, n_vars))
    if equicorrelation:
        rho = float(equicorrelation)
        if not 0.0 <= rho < 1.0:
            raise ValidationError("equicorrelation must lie in [0, 1)")
        x = np.sqrt(1 - rho) * x + np.sqrt(rho) * rng.standard_normal((n_obs, 1))
        y = np.sqrt(1 - rho) * y + np.sqrt(rho) * rng.standard_normal((n_obs, 1))
    y[:, :n_effect_vars] -= effect_shift
    return x, y


def _sim_seed(seed: int, sim: int) -> int:
    words = np.random.SeedSequence([seed, sim, 0x70]).generate_state(2, np.uint64)
    return int(words[0])


def fwer_sweep(
    n_vars: int,
    n_obs: int,
    n_sims: int,
    alpha: float = 0.05,
    corrections=("max", "bonferroni", "holm", "none"),
    effect_shift: float = 0.0,
    seed: int = 0,
    *,
    n_perm: int = 1000,
    n_effect_vars: int | None = None,
    equicorrelation: float = 0.0,
    threads: int | None = None,
) -> dict[Correction, FwerReport]:
    """FWER and power of several corrections on the same simulated datasets.

    Each dataset is analysed once with :func:`permuttest2` under max
    correction; its uncorrected p-values give the Bonferroni, Holm and
    uncorrected decisions, exactly as the engine would report them.
    """
    if n_sims < 100:
        raise ValidationError("fwer simulation needs n_sims >= 100")
    corrections = [_coerce_enum(Correction, c, "correction") for c in corrections]
    if n_effect_vars is None:
        n_effect_vars = n_vars // 2 if effect_shift else 0
    validate_config(n_perm=n_perm, alpha=alpha)  # warns once about a small n_perm
    null_vars = np.arange(n_effect_vars, n_vars)
    any_false = {c: 0 for c in corrections}
    detections = {c: 0.0 for c in corrections}
    for sim in range(n_sims):
        x, y = simulate_dataset(seed, sim, n_obs, n_vars, effect_shift, n_effect_vars, equicorrelation)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", LowPermutationCountWarning)
            cfg = validate_config(n_perm=n_perm, seed=_sim_seed(seed, sim), alpha=alpha, correction="max")
        res = permuttest2(x, y, cfg, threads=threads)
        p_by = {
            Correction.MAX: res.p,
            Correction.NONE: res.p_uncorrected,
            Correction.BONFERRONI: adjust_bonferroni(res.p_uncorrected, n_vars),
            Correction.HOLM: adjust_holm(res.p_uncorrected),
        }
        for c in corrections:
            sig = p_by[c] < alpha
            if null_vars.size and sig[null_vars].any():
                any_false[c] += 1
            if n_effect_vars:
                detections[c] += sig[:n_effect_vars].mean()
    out = {}
    for c in corrections:
        f = any_false[c] / n_sims
        out[c] = FwerReport(
            n_sims=n_sims,
            n_vars=n_vars,
            n_obs=n_obs,
            alpha=alpha,
            correction=c,
            empirical_fwer=f,
            empirical_power=detections[c] / n_sims if n_effect_vars else None,
            mc_stderr=math.sqrt(f * (1 - f) / n_sims),
            effect_shift=effect_shift,
            n_effect_vars=n_effect_vars,
            n_perm=n_perm,
            seed=seed,
        )
    return out


def fwer_sim(
    n_vars: int,
    n_obs: int,
    n_sims: int,
    alpha: float = 0.05,
    correction="max",
    effect_shift: float = 0.0,
    seed: int = 0,
    **kwargs,
) -> FwerReport:
    """Empirical FWER (and power when ``effect_shift`` is non-zero) of one correction."""
    correction = _coerce_enum(Correction, correction, "correction")
    return fwer_sweep(n_vars, n_obs, n_sims, alpha, (correction,), effect_shift, seed, **kwargs)[correction]
