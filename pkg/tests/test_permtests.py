import warnings

import numpy as np
import pytest

from permstat import (
    permuanova1,
    permuanova2,
    permucorr,
    permuttest,
    permuttest2,
    permuvartest2,
    permuztest,
)
from permstat.core import validate_config
from permstat.errors import (
    ShapeMismatch,
    SigmaNonPositive,
    TailUnsupported,
    Unbalanced,
    UnequalSampleSizeWarning,
)
from permstat.inference import NullDistribution, pvalues
from permstat.reference import exact_test

MC = dict(exact_threshold=0, n_perm=50000, seed=3)


def test_spec_small_cases():
    r = permuttest([1, 2, 3])
    assert r.exact and r.n_draws == 8
    assert r.statistic[0] == pytest.approx(3.464102, abs=1e-6)
    assert r.p[0] == 0.25
    r = permuttest2([1, 2], [3, 4])
    assert r.exact and r.p[0] == pytest.approx(1 / 3)
    r = permuztest([1, 2, 3], 0, 1)
    assert r.p[0] == 0.25 and r.statistic[0] == pytest.approx(3.464102, abs=1e-6)
    r = permuztest([1, 2, 3], 2, 1)
    assert r.statistic[0] == 0 and r.p[0] == 1
    r = permuanova1([1, 2, 3, 4, 5, 6, 7, 8, 9], list("aaabbbccc"))
    assert r.statistic[0] == pytest.approx(27.0) and r.n_draws == 1680


def test_identical_samples():
    x = np.array([[1.0, 4.0], [2.0, 3.0], [5.0, 9.0]])
    r = permuttest2(x, x)
    assert np.all(r.statistic == 0) and np.all(r.p == 1)
    r = permuvartest2(x, x)
    assert np.allclose(r.statistic, 1) and np.allclose(r.p, 1)
    r = permuttest(x, x)
    assert set(r.errors) == {0, 1} and np.all(np.isnan(r.p))
    r = permucorr(x, x)
    assert np.allclose(r.statistic, 1)


def test_variance_ratio():
    rng = np.random.default_rng(1)
    y = rng.normal(size=(10, 3))
    y = (y - y.mean(0)) / y.std(0, ddof=1)
    r = permuvartest2(2 * y + 5, y, {"n_perm": 1000})
    assert np.allclose(r.statistic, 4.0)
    assert r.df.shape == (3, 2)


@pytest.mark.parametrize("tail", ["two", "right", "left"])
def test_exact_modes_match_oracle(tail):
    rng = np.random.default_rng(20)
    for _ in range(5):
        x, y = rng.normal(size=5), rng.normal(size=4)
        cfg = {"tail": tail, "correction": "none"}
        assert permuttest2(x, y, cfg).p[0] == pytest.approx(exact_test(x, y, family="t2", tail=tail), abs=1e-12)
        assert permuvartest2(x, y, cfg).p[0] == pytest.approx(exact_test(x, y, family="f", tail=tail), abs=1e-12)
        x6 = rng.normal(size=6)
        assert permuttest(x6, None, 0.2, cfg).p[0] == pytest.approx(exact_test(x6, mu=0.2, family="t", tail=tail), abs=1e-12)
        assert permuztest(x6, 0.1, 1.5, cfg).p[0] == pytest.approx(
            exact_test(x6, mu=0.1, family="z", sigma=1.5, tail=tail), abs=1e-12)
        y6 = rng.normal(size=6)
        for kind in ("pearson", "spearman", "rankit"):
            assert permucorr(x6, y6, kind, cfg).p[0] == pytest.approx(
                exact_test(x6, y6, family="corr", kind=kind, tail=tail), abs=1e-12)
    v = rng.normal(size=8)
    lab = list("aaabbccc")
    assert permuanova1(v, lab).p[0] == pytest.approx(exact_test(v, family="anova1", labels=lab, tail="right"))


def test_welch_exact_matches_oracle():
    rng = np.random.default_rng(8)
    x, y = rng.normal(size=4), rng.normal(0, 3, size=6)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UnequalSampleSizeWarning)
        r = permuttest2(x, y, {"var_assumption": "unequal"})
    assert r.p[0] == pytest.approx(exact_test(x, y, family="t2", var_assumption="unequal"))


def test_monte_carlo_close_to_exact():
    rng = np.random.default_rng(4)
    x, y = rng.normal(size=4), rng.normal(size=4) + 1
    assert abs(permuvartest2(x, y, MC).p[0] - exact_test(x, y, family="f")) < 0.01
    assert abs(permuttest2(x, y, MC).p[0] - exact_test(x, y, family="t2")) < 0.01
    x5, y5 = rng.normal(size=5), rng.normal(size=5)
    assert abs(permucorr(x5, y5, "pearson", MC).p[0] - exact_test(x5, y5, family="corr")) < 0.01


def test_anova1_two_groups_matches_ttest2():
    rng = np.random.default_rng(6)
    x, y = rng.normal(size=15), rng.normal(size=15) + 0.6
    cfg = {"n_perm": 20000, "seed": 1}
    a = permuanova1(np.r_[x, y], [0] * 15 + [1] * 15, cfg)
    t = permuttest2(x, y, cfg)
    assert a.statistic[0] == pytest.approx(t.statistic[0] ** 2, rel=1e-10)
    assert abs(a.p[0] - t.p[0]) < 0.01
    with pytest.raises(TailUnsupported):
        permuanova1(np.r_[x, y], [0] * 15 + [1] * 15, {"tail": "two"})


def test_anova2_shapes_and_shift_invariance():
    rng = np.random.default_rng(2)
    a = np.repeat([0, 1], 12)
    b = np.tile(np.repeat([0, 1, 2], 4), 2)
    v = rng.normal(size=24) + 2.0 * (a == 1)
    cfg = {"n_perm": 2000, "seed": 5}
    res = permuanova2(v, a, b, cfg)
    assert [r.family for r in res] == ["anova2-A", "anova2-B", "anova2-AB"]
    shifted = permuanova2(v + 100.0, a, b, cfg)
    for r, s in zip(res, shifted):
        assert r.statistic[0] == pytest.approx(s.statistic[0], rel=1e-9)
        assert r.p[0] == s.p[0]
    assert res[0].p[0] < 0.01
    with pytest.raises(Unbalanced):
        permuanova2(v[:-1], a[:-1], b[:-1])


def test_anova2_null_calibration():
    a = np.repeat([0, 1], 10)
    b = np.tile(np.repeat([0, 1], 5), 2)
    hits = np.zeros(3)
    n_sims = 500
    for s in range(n_sims):
        v = np.random.default_rng(1000 + s).normal(size=20)
        res = permuanova2(v, a, b, {"n_perm": 200, "seed": s})
        hits += [r.p[0] < 0.05 for r in res]
    assert np.all(np.abs(hits / n_sims - 0.05) <= 0.02)


def test_correlation_matrix_mode():
    x = np.random.default_rng(9).normal(size=(12, 4))
    r = permucorr(x, None, "spearman", {"n_perm": 500})
    assert r.n_vars == 6
    assert r.names[0] == "v1:v2" and r.names[-1] == "v3:v4"


def test_correction_monotone_and_single_variable_identity():
    rng = np.random.default_rng(12)
    x, y = rng.normal(size=(15, 8)), rng.normal(size=(15, 8))
    y[:, :3] += 0.8
    res = {c: permuttest2(x, y, {"n_perm": 2000, "seed": 4, "correction": c}) for c in ("max", "none", "bonferroni", "holm")}
    assert np.all(res["max"].p >= res["none"].p)
    assert np.all(res["holm"].p <= res["bonferroni"].p)
    assert np.array_equal(res["max"].p_uncorrected, res["none"].p)
    one = {c: permuttest2(x[:, :1], y[:, :1], {"n_perm": 2000, "seed": 4, "correction": c}) for c in ("max", "none", "bonferroni", "holm")}
    for c in one.values():
        assert c.p[0] == one["none"].p[0]
        assert np.allclose(c.ci, one["none"].ci)


def test_stored_null_reproduces_p():
    rng = np.random.default_rng(13)
    x, y = rng.normal(size=(12, 5)), rng.normal(size=(12, 5))
    for corr in ("max", "none"):
        r = permuttest2(x, y, {"n_perm": 1000, "correction": corr})
        dist = NullDistribution(r.null_distribution, r.config.tail, exact=r.exact)
        assert np.array_equal(pvalues(r.statistic, dist), r.p)


def test_determinism_and_statistic_invariance():
    rng = np.random.default_rng(14)
    x, y = rng.normal(size=(20, 4)), rng.normal(size=(25, 4))
    cfg = {"n_perm": 1500, "seed": 77, "var_assumption": "unequal"}
    a, b = permuttest2(x, y, cfg), permuttest2(x, y, cfg)
    assert a.to_dict() == b.to_dict()
    c = permuttest2(x, y, dict(cfg, seed=78, n_perm=3000))
    assert np.array_equal(a.statistic, c.statistic)
    assert not np.array_equal(a.null_distribution, c.null_distribution)
    t = permuttest2(x, y, cfg, threads=3)
    assert np.array_equal(a.p, t.p)


def test_warnings_and_errors():
    rng = np.random.default_rng(15)
    with pytest.warns(UnequalSampleSizeWarning):
        permuttest2(rng.normal(size=6), rng.normal(size=9), {"n_perm": 500})
    with pytest.raises(ShapeMismatch):
        permuttest(np.zeros((5, 2)), np.zeros((5, 3)))
    with pytest.raises(SigmaNonPositive):
        permuztest([1, 2, 3], 0, -1)


def test_one_sample_null_calibration():
    x = np.random.default_rng(16).normal(size=(100, 200))
    r = permuttest(x, cfg={"n_perm": 1000, "correction": "none", "seed": 1})
    p = r.p
    assert np.all(p > 0.001)
    # roughly uniform: about 5% below 0.05
    assert abs(np.mean(p < 0.05) - 0.05) < 0.04


def test_config_echo():
    r = permuttest2([1, 2, 3], [4, 5, 6], validate_config(seed=5, n_perm=200))
    assert r.config.seed == 5 and r.config.n_perm == 200
