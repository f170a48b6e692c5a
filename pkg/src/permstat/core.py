"""Domain types shared by every test family.

Results are plain frozen dataclasses holding read-only numpy arrays, so they
can be passed between threads freely. None of them carries an accept/reject
flag: callers get statistics, p-values and intervals and decide for
themselves.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, fields
from enum import Enum
from typing import Any, Mapping

import numpy as np

from .errors import (
    AlphaOutOfRange,
    DimensionTooSmall,
    LowPermutationCountWarning,
    NonFiniteValue,
    PermCountTooLow,
    SeedOutOfRange,
    ValidationError,
)

DEFAULT_N_PERM = 10000
DEFAULT_EXACT_THRESHOLD = 20000
MIN_N_PERM = 100
ADVISED_N_PERM = 1000
SEED_MAX = 2**64 - 1


class Tail(str, Enum):
    TWO = "two"
    RIGHT = "right"
    LEFT = "left"


class Correction(str, Enum):
    MAX = "max"
    BONFERRONI = "bonferroni"
    HOLM = "holm"
    NONE = "none"


class VarAssumption(str, Enum):
    EQUAL = "equal"
    UNEQUAL = "unequal"


_ALIASES = {
    "both": "two",
    "two-tailed": "two",
    "twotailed": "two",
    "two_tailed": "two",
    "0": "two",
    "1": "right",
    "-1": "left",
    "pooled": "equal",
    "student": "equal",
    "welch": "unequal",
    "unpooled": "unequal",
}


def _coerce_enum(enum_cls, value, what):
    if isinstance(value, enum_cls):
        return value
    key = str(value).strip().lower()
    key = _ALIASES.get(key, key)
    try:
        return enum_cls(key)
    except ValueError:
        choices = ", ".join(m.value for m in enum_cls)
        raise ValidationError(f"invalid {what} {value!r}; expected one of {choices}") from None


@dataclass(frozen=True)
class TestConfig:
    """Resampling configuration for a permutation test.

    Parameters
    ----------
    n_perm : int
        Number of Monte Carlo rearrangements. Ignored in exact mode.
    seed : int
        Unsigned 64-bit seed of the counter-based generator.
    tail : Tail
        ``two`` compares magnitudes, ``right``/``left`` are one-sided.
    alpha : float
        Level used for the confidence intervals.
    correction : Correction
        Multiplicity correction across variables; max-statistic by default.
    var_assumption : VarAssumption
        ``equal`` selects Student's pooled t, ``unequal`` Welch's t.
    exact_threshold : int
        Enumerate every rearrangement when there are at most this many.
    """

    __test__ = False  # keep pytest from collecting this class

    n_perm: int = DEFAULT_N_PERM
    seed: int = 0
    tail: Tail = Tail.TWO
    alpha: float = 0.05
    correction: Correction = Correction.MAX
    var_assumption: VarAssumption = VarAssumption.EQUAL
    exact_threshold: int = DEFAULT_EXACT_THRESHOLD

    def to_dict(self) -> dict:
        return {
            "n_perm": self.n_perm,
            "seed": self.seed,
            "tail": self.tail.value,
            "alpha": self.alpha,
            "correction": self.correction.value,
            "var_assumption": self.var_assumption.value,
            "exact_threshold": self.exact_threshold,
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "TestConfig":
        return validate_config(d)


def validate_config(cfg: TestConfig | Mapping[str, Any] | None = None, **overrides) -> TestConfig:
    """Fill defaults, coerce enum strings and range-check a configuration.

    Accepts a :class:`TestConfig`, a mapping of field names (missing or
    ``None`` entries take their defaults) or nothing at all. Keyword
    overrides are applied last.

    Raises
    ------
    AlphaOutOfRange
        If ``alpha`` is not strictly between 0 and 1.
    PermCountTooLow
        If ``n_perm`` is below 100.
    SeedOutOfRange
        If ``seed`` does not fit an unsigned 64-bit integer.
    """
    if cfg is None:
        values: dict[str, Any] = {}
    elif isinstance(cfg, TestConfig):
        values = {f.name: getattr(cfg, f.name) for f in fields(TestConfig)}
    else:
        known = {f.name for f in fields(TestConfig)}
        unknown = set(cfg) - known
        if unknown:
            raise ValidationError(f"unknown configuration fields: {sorted(unknown)}")
        values = dict(cfg)
    values.update(overrides)
    values = {k: v for k, v in values.items() if v is not None}
    base = TestConfig()

    n_perm = values.get("n_perm", base.n_perm)
    if isinstance(n_perm, bool) or int(n_perm) != n_perm:
        raise ValidationError(f"n_perm must be an integer, got {n_perm!r}")
    n_perm = int(n_perm)
    if n_perm < MIN_N_PERM:
        raise PermCountTooLow(f"n_perm={n_perm} is below the floor of {MIN_N_PERM}")
    if n_perm < ADVISED_N_PERM:
        warnings.warn(
            f"n_perm={n_perm}: several thousand permutations are advisable for stable p-values",
            LowPermutationCountWarning,
            stacklevel=2,
        )

    alpha = float(values.get("alpha", base.alpha))
    if not 0.0 < alpha < 1.0:
        raise AlphaOutOfRange(f"alpha={alpha} must lie strictly between 0 and 1")

    seed = values.get("seed", base.seed)
    if isinstance(seed, bool) or int(seed) != seed or not 0 <= int(seed) <= SEED_MAX:
        raise SeedOutOfRange(f"seed={seed!r} must be an unsigned 64-bit integer")

    exact_threshold = int(values.get("exact_threshold", base.exact_threshold))
    if exact_threshold < 0:
        raise ValidationError("exact_threshold must be non-negative")

    return TestConfig(
        n_perm=n_perm,
        seed=int(seed),
        tail=_coerce_enum(Tail, values.get("tail", base.tail), "tail"),
        alpha=alpha,
        correction=_coerce_enum(Correction, values.get("correction", base.correction), "correction"),
        var_assumption=_coerce_enum(
            VarAssumption, values.get("var_assumption", base.var_assumption), "variance assumption"
        ),
        exact_threshold=exact_threshold,
    )


# -----------------------------------------------------------------------------
# Data containers
# -----------------------------------------------------------------------------
def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


def check_finite(values: np.ndarray, name: str = "data") -> None:
    bad = ~np.isfinite(values)
    if bad.any():
        cells = [tuple(int(i) for i in c) for c in np.argwhere(bad)]
        shown = ", ".join(f"(row {r}, col {c})" for r, c in cells[:10])
        more = f" and {len(cells) - 10} more" if len(cells) > 10 else ""
        raise NonFiniteValue(f"{name} has non-finite entries at {shown}{more}", cells)


@dataclass(frozen=True)
class DataMatrix:
    """Observations x variables matrix of finite reals."""

    values: np.ndarray
    names: tuple[str, ...] = ()

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2:
            raise ValidationError(f"data must be 1-D or 2-D, got {v.ndim} dimensions")
        if v.shape[1] < 1:
            raise DimensionTooSmall("data must contain at least one variable")
        check_finite(v)
        object.__setattr__(self, "values", _frozen(v))
        names = tuple(self.names) or tuple(f"v{j + 1}" for j in range(v.shape[1]))
        if len(names) != v.shape[1]:
            raise ValidationError("number of names does not match number of variables")
        object.__setattr__(self, "names", names)

    @property
    def n_obs(self) -> int:
        return self.values.shape[0]

    @property
    def n_vars(self) -> int:
        return self.values.shape[1]


def as_matrix(x, name: str = "x", min_obs: int = 2) -> tuple[np.ndarray, tuple[str, ...]]:
    """Coerce ``x`` into a finite 2-D float array plus variable names."""
    if not isinstance(x, DataMatrix):
        x = DataMatrix(np.asarray(x, dtype=float))
    if x.n_obs < min_obs:
        raise DimensionTooSmall(f"{name} needs at least {min_obs} observations, got {x.n_obs}")
    return np.asarray(x.values), x.names


@dataclass(frozen=True)
class SampleSummary:
    n: int
    mean: float
    sd: float

    @classmethod
    def of(cls, sample) -> "SampleSummary":
        a = np.asarray(sample, dtype=float).ravel()
        if a.size < 1:
            raise DimensionTooSmall("summary of an empty sample")
        sd = float(np.std(a, ddof=1)) if a.size > 1 else 0.0
        return cls(int(a.size), float(np.mean(a)), sd)

    @property
    def var(self) -> float:
        return self.sd**2

    def to_dict(self) -> dict:
        return {"n": self.n, "mean": self.mean, "sd": self.sd}


# -----------------------------------------------------------------------------
# Results
# -----------------------------------------------------------------------------
def _list(a) -> list:
    return np.asarray(a, dtype=float).tolist()


@dataclass(frozen=True)
class PermutationResult:
    """Outcome of a permutation test, one entry per variable (or pair).

    ``null_distribution`` is 1-D (the shared max-statistic distribution)
    under max correction and ``(n_draws, n_vars)`` otherwise. ``p_uncorrected``
    always holds the per-variable p-values before any multiplicity
    adjustment. Variables listed in ``errors`` carry NaN statistics and are
    excluded from the max reduction.
    """

    family: str
    statistic: np.ndarray
    df: np.ndarray
    p: np.ndarray
    ci: np.ndarray
    estimate: np.ndarray
    se: np.ndarray
    null_distribution: np.ndarray
    config: TestConfig
    exact: bool
    names: tuple[str, ...]
    p_uncorrected: np.ndarray
    summaries: Mapping[str, tuple[SampleSummary, ...]] = field(default_factory=dict)
    errors: Mapping[int, str] = field(default_factory=dict)

    def __post_init__(self):
        for name in ("statistic", "df", "p", "ci", "estimate", "se", "null_distribution", "p_uncorrected"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))

    @property
    def n_vars(self) -> int:
        return self.statistic.shape[0]

    @property
    def n_draws(self) -> int:
        return self.null_distribution.shape[0]

    def to_dict(self, include_null: bool = True) -> dict:
        d = {
            "family": self.family,
            "config": self.config.to_dict(),
            "exact": self.exact,
            "n_draws": self.n_draws,
            "names": list(self.names),
            "statistic": _list(self.statistic),
            "df": _list(self.df),
            "p": _list(self.p),
            "p_uncorrected": _list(self.p_uncorrected),
            "ci": _list(self.ci),
            "estimate": _list(self.estimate),
            "se": _list(self.se),
            "summaries": {
                g: [s.to_dict() for s in ss] for g, ss in self.summaries.items()
            },
            "errors": {str(k): v for k, v in self.errors.items()},
        }
        if include_null:
            d["null_distribution"] = _list(self.null_distribution)
        return d

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "PermutationResult":
        n_vars = len(d["names"])
        null = d.get("null_distribution")
        return cls(
            family=d["family"],
            statistic=np.asarray(d["statistic"], dtype=float),
            df=np.asarray(d["df"], dtype=float),
            p=np.asarray(d["p"], dtype=float),
            ci=np.asarray(d["ci"], dtype=float).reshape(n_vars, 2),
            estimate=np.asarray(d["estimate"], dtype=float),
            se=np.asarray(d["se"], dtype=float),
            null_distribution=np.asarray(null if null is not None else [], dtype=float),
            config=validate_config(d["config"]),
            exact=bool(d["exact"]),
            names=tuple(d["names"]),
            p_uncorrected=np.asarray(d["p_uncorrected"], dtype=float),
            summaries={
                g: tuple(SampleSummary(int(s["n"]), float(s["mean"]), float(s["sd"])) for s in ss)
                for g, ss in d.get("summaries", {}).items()
            },
            errors={int(k): v for k, v in d.get("errors", {}).items()},
        )


@dataclass(frozen=True)
class EffectSizeResult:
    """Per-variable effect size with percentile bootstrap interval.

    ``correction_factor`` is the small-sample bias factor that was applied to
    the estimate and both interval bounds (1 where no correction applies).
    """

    effect: np.ndarray
    ci: np.ndarray
    kind: str
    label: str
    correction_factor: np.ndarray
    n_boot: int
    seed: int
    alpha: float
    paired: bool
    names: tuple[str, ...]
    uncorrected: np.ndarray
    boot_distribution: np.ndarray = field(default_factory=lambda: np.empty((0, 0)))
    errors: Mapping[int, str] = field(default_factory=dict)

    def __post_init__(self):
        for name in ("effect", "ci", "correction_factor", "uncorrected", "boot_distribution"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))

    @property
    def n_vars(self) -> int:
        return self.effect.shape[0]

    def to_dict(self, include_boot: bool = False) -> dict:
        d = {
            "kind": self.kind,
            "label": self.label,
            "n_boot": self.n_boot,
            "seed": self.seed,
            "alpha": self.alpha,
            "paired": self.paired,
            "names": list(self.names),
            "effect": _list(self.effect),
            "uncorrected": _list(self.uncorrected),
            "ci": _list(self.ci),
            "correction_factor": _list(self.correction_factor),
            "errors": {str(k): v for k, v in self.errors.items()},
        }
        if include_boot:
            d["boot_distribution"] = _list(self.boot_distribution)
        return d

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "EffectSizeResult":
        n_vars = len(d["names"])
        boot = d.get("boot_distribution")
        return cls(
            effect=np.asarray(d["effect"], dtype=float),
            ci=np.asarray(d["ci"], dtype=float).reshape(n_vars, 2),
            kind=d["kind"],
            label=d["label"],
            correction_factor=np.asarray(d["correction_factor"], dtype=float),
            n_boot=int(d["n_boot"]),
            seed=int(d["seed"]),
            alpha=float(d["alpha"]),
            paired=bool(d["paired"]),
            names=tuple(d["names"]),
            uncorrected=np.asarray(d["uncorrected"], dtype=float),
            boot_distribution=np.asarray(boot if boot is not None else np.empty((0, 0)), dtype=float),
            errors={int(k): v for k, v in d.get("errors", {}).items()},
        )

