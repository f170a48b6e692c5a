import numpy as np
import pytest

from permstat.core import Tail
from permstat.errors import SEUnavailable, ValidationError
from permstat.inference import (
    NullDistribution,
    adjust_bonferroni,
    adjust_holm,
    ci_from_dist,
    critical_value,
    extreme,
    max_reduce,
    percentile,
    pvalue,
    pvalues,
)

ROWS = [[1.0, -3.0], [2.0, 0.5]]


@pytest.mark.parametrize("tail,expected", [("two", [3, 2]), ("right", [1, 2]), ("left", [-3, 0.5])])
def test_max_reduce(tail, expected):
    d = max_reduce(ROWS, tail)
    assert d.values.tolist() == expected
    assert d.corrected and d.n_vars_joined == 2


def test_max_reduce_skips_nan_columns():
    m = np.array([[1.0, np.nan, -4.0], [2.0, np.nan, 0.5]])
    d = max_reduce(m, "two")
    assert d.values.tolist() == [4.0, 2.0]
    assert d.n_vars_joined == 2


def test_pvalue_conventions():
    dist = NullDistribution(np.array([3.0, 1.0, 2.0, 0.5]), Tail.TWO)
    assert pvalue(2.5, dist) == pytest.approx(0.4)
    big = NullDistribution(np.linspace(-1, 1, 9999))
    assert pvalue(5.0, big) == 1 / 10000
    exact = NullDistribution(np.array([2.828427, -2.828427, 0.707107, -0.707107, 0.0, 0.0]), exact=True)
    assert pvalue(-2.828427, exact) == pytest.approx(1 / 3)
    assert pvalue(np.nan, dist) != pvalue(np.nan, dist)


def test_pvalues_ties_survive_rounding():
    obs = 0.1 + 0.2
    dist = NullDistribution(np.array([0.3, 0.0, 0.0, 0.0]), exact=True)
    assert pvalue(obs, dist) == 0.25
    assert pvalue(0.3, NullDistribution(np.array([obs, 0, 0, 0]), exact=True)) == 0.25


def test_ratio_tails():
    dist = NullDistribution(np.array([0.25, 1.0, 2.0, 4.0]), Tail.TWO, exact=True, ratio=True)
    # max(F, 1/F): 4, 1, 2, 4
    assert pvalue(0.25, dist) == 0.5
    assert pvalue(4.0, dist) == 0.5
    assert np.allclose(extreme([0.5, 2.0], "two", ratio=True), [2.0, 2.0])


def test_per_variable_pvalues():
    null = np.array([[1.0, 5.0], [2.0, 6.0], [3.0, 7.0]])
    dist = NullDistribution(null, Tail.RIGHT)
    assert pvalues([2.0, 8.0], dist).tolist() == [0.75, 0.25]
    with pytest.raises(ValidationError):
        pvalues([1.0, 2.0, 3.0], dist)


def test_percentile():
    assert percentile([1, 2, 3, 4], 50) == 2.5
    assert percentile([7], 13) == 7
    assert percentile([1, 2, 3, 4], 100) == 4
    assert percentile([4, 1, 3, 2], 25) == percentile([1, 2, 3, 4], 25)
    with pytest.raises(ValidationError):
        percentile([1, 2], 101)
    with pytest.raises(ValidationError):
        percentile([], 50)


def test_t_interval_arithmetic():
    # crit 2.0 from a null whose 95th percentile of |t| is exactly 2
    values = np.r_[np.zeros(95), np.full(6, 2.0)]
    dist = NullDistribution(values, Tail.TWO)
    assert critical_value(dist, 0.05) == 2.0
    lo, hi = ci_from_dist(np.array([1.03]), np.array([0.2286]), dist, 0.05, "t")
    assert lo[0] == pytest.approx(0.5728) and hi[0] == pytest.approx(1.4872)
    lo, hi = ci_from_dist(np.array([1.03]), np.array([0.2286]), NullDistribution(values, Tail.RIGHT), 0.05, "t")
    assert lo[0] == pytest.approx(0.5728) and hi[0] == np.inf
    with pytest.raises(SEUnavailable):
        ci_from_dist(np.array([1.0]), np.array([0.0]), dist, 0.05, "t")


def test_correlation_interval_clamped():
    values = np.r_[np.zeros(95), np.full(6, 0.3)]
    lo, hi = ci_from_dist(np.array([0.9]), None, NullDistribution(values), 0.05, "r")
    assert (lo[0], hi[0]) == pytest.approx((0.6, 1.0))


def test_ratio_interval():
    values = np.r_[np.ones(95), np.full(6, 3.0)]
    lo, hi = ci_from_dist(np.array([2.0]), None, NullDistribution(values, ratio=True), 0.05, "f")
    assert (lo[0], hi[0]) == pytest.approx((2 / 3, 6.0))


def test_bonferroni_and_holm():
    assert adjust_bonferroni([0.01, 0.04], 2).tolist() == [0.02, 0.08]
    assert adjust_bonferroni([0.7], 2).tolist() == [1.0]
    assert adjust_bonferroni([0.3, 0.02], 1).tolist() == [0.3, 0.02]
    assert adjust_holm([0.01, 0.04]).tolist() == [0.02, 0.04]
    assert adjust_holm([0.04, 0.01]).tolist() == [0.04, 0.02]
    assert adjust_holm([0.03, 0.03, 0.03]) == pytest.approx([0.09, 0.09, 0.09])
    h = adjust_holm([0.02, np.nan, 0.01])
    assert np.isnan(h[1]) and h[0] == 0.02 and h[2] == 0.02
