"""Permutation tests with max-statistic correction and bootstrapped effect sizes."""

__version__ = "0.1.0"

from .core import (
    Correction,
    DataMatrix,
    EffectSizeResult,
    PermutationResult,
    SampleSummary,
    Tail,
    TestConfig,
    VarAssumption,
    validate_config,
)
from .effectsize import BootConfig, EffectKind, bias_factor, booteffectsize, cliffs_d, effect_point
from .errors import (
    DataError,
    LowPermutationCountWarning,
    PermstatError,
    PermstatWarning,
    UnequalSampleSizeWarning,
    ValidationError,
)
from .inference import adjust_bonferroni, adjust_holm
from .permtests import (
    permuanova1,
    permuanova2,
    permucorr,
    permuttest,
    permuttest2,
    permuvartest2,
    permuztest,
)
from .reference import FwerReport, exact_test, fwer_sim, fwer_sweep
from .special import f_cdf, norm_cdf, norm_inv, t_cdf

__all__ = [
    "BootConfig",
    "Correction",
    "DataError",
    "DataMatrix",
    "EffectKind",
    "EffectSizeResult",
    "FwerReport",
    "LowPermutationCountWarning",
    "PermstatError",
    "PermstatWarning",
    "PermutationResult",
    "SampleSummary",
    "Tail",
    "TestConfig",
    "UnequalSampleSizeWarning",
    "ValidationError",
    "VarAssumption",
    "adjust_bonferroni",
    "adjust_holm",
    "bias_factor",
    "booteffectsize",
    "cliffs_d",
    "effect_point",
    "exact_test",
    "f_cdf",
    "fwer_sim",
    "fwer_sweep",
    "norm_cdf",
    "norm_inv",
    "permuanova1",
    "permuanova2",
    "permucorr",
    "permuttest",
    "permuttest2",
    "permuvartest2",
    "permuztest",
    "t_cdf",
    "validate_config",
]
