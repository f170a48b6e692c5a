import numpy as np
import pytest
from scipy import stats

from permstat import kernels
from permstat.core import SampleSummary
from permstat.errors import DimensionTooSmall, SigmaNonPositive, Unbalanced, ZeroVariance


def test_summary():
    s = kernels.summary([1, 2, 3])
    assert (s.n, s.mean, s.sd) == (3, 2.0, 1.0)
    assert kernels.summary([5]).sd == 0.0
    assert kernels.summary([2, 2, 2, 2]).sd == 0.0


def test_two_sample_t():
    r = kernels.t_two_sample([1, 2], [3, 4])
    assert r.statistic == pytest.approx(-2.828427, abs=1e-6)
    assert r.df == 2.0
    assert kernels.t_two_sample([1, 2, 5], [1, 2, 5]).statistic == 0.0
    rng = np.random.default_rng(0)
    x, y = rng.normal(size=12), rng.normal(1, 2, size=17)
    for va, eq in (("equal", True), ("unequal", False)):
        ours = kernels.t_two_sample(x, y, va)
        ref = stats.ttest_ind(x, y, equal_var=eq)
        assert ours.statistic == pytest.approx(ref.statistic, rel=1e-12)
        assert ours.df == pytest.approx(ref.df, rel=1e-12)


def test_t_from_reported_summaries():
    r = kernels.t_from_summaries(SampleSummary(30, -0.06, 0.91), SampleSummary(30, -1.09, 0.86))
    assert abs(r.statistic - 4.49) <= 0.02
    assert r.df == 58.0


def test_one_sample_and_paired():
    r = kernels.t_one_sample([1, 2, 3])
    assert r.statistic == pytest.approx(3.464102, abs=1e-6)
    assert r.df == 2.0
    with pytest.raises(ZeroVariance):
        kernels.t_one_sample([5, 5, 5], 5)
    x = np.array([1.0, 4.0, 2.0])
    with pytest.raises(ZeroVariance):
        kernels.t_one_sample(x - x)


def test_f_and_z():
    assert kernels.f_two_sample([0, 2, 4], [0, 1, 2]).statistic == 4.0
    assert kernels.f_two_sample([1, 3, 4], [1, 3, 4]).statistic == 1.0
    assert kernels.f_two_sample([1, 3, 4], [1, 2, 3, 4]).df == (2.0, 3.0)
    with pytest.raises(ZeroVariance):
        kernels.f_two_sample([1, 2, 3], [2, 2, 2])
    assert kernels.z_one_sample([1, 2, 3], 0, 1).statistic == pytest.approx(3.464102, abs=1e-6)
    assert kernels.z_one_sample([1, 2, 3], 2, 1).statistic == 0.0
    with pytest.raises(SigmaNonPositive):
        kernels.z_one_sample([1, 2, 3], 0, 0)


def test_correlations():
    assert kernels.correlation([1, 2, 3], [2, 4, 6]).statistic == pytest.approx(1.0)
    assert kernels.correlation([1, 2, 3], [1, 8, 27], "spearman").statistic == pytest.approx(1.0)
    for kind in kernels.CORRELATION_KINDS:
        assert kernels.correlation([1, 2, 3], [3, 2, 1], kind).statistic == pytest.approx(-1.0)
    rng = np.random.default_rng(3)
    x, y = rng.normal(size=25), rng.normal(size=25)
    y[3] = y[4]
    assert kernels.correlation(x, y).statistic == pytest.approx(stats.pearsonr(x, y)[0], abs=1e-13)
    assert kernels.correlation(x, y, "spearman").statistic == pytest.approx(stats.spearmanr(x, y)[0], abs=1e-13)


def test_ranks_and_rankits():
    assert kernels.rank_transform([10, 20, 30]).tolist() == [1, 2, 3]
    assert kernels.rank_transform([5, 5, 7]).tolist() == [1.5, 1.5, 3]
    assert kernels.rank_transform([4]).tolist() == [1]
    x = np.random.default_rng(1).integers(0, 5, size=40)
    assert np.array_equal(kernels.rank_transform(x), stats.rankdata(x))
    assert np.allclose(kernels.rankit_scores(4), [-1.150349, -0.318639, 0.318639, 1.150349], atol=1e-6)
    assert np.allclose(kernels.rankit_scores(2), [-0.674490, 0.674490], atol=1e-6)
    for n in (2, 3, 10, 51):
        s = kernels.rankit_scores(n)
        assert np.array_equal(s, -s[::-1])
        assert abs(s.sum()) < 1e-14


def test_anova1():
    r = kernels.anova1_f([[1, 2, 3], [4, 5, 6], [7, 8, 9]])
    assert r.statistic == pytest.approx(27.0)
    assert r.df == (2.0, 6.0)
    assert kernels.anova1_f([[1, 2, 3]] * 3).statistic == 0.0
    with pytest.raises(ZeroVariance):
        kernels.anova1_f([[2, 2], [2, 2]])
    rng = np.random.default_rng(5)
    gs = [rng.normal(size=n) for n in (4, 7, 5, 9)]
    assert kernels.anova1_f(gs).statistic == pytest.approx(stats.f_oneway(*gs).statistic, rel=1e-12)


def _anova2_oracle(grid):
    # sequential sums of squares from nested least-squares fits
    a, b, r = grid.shape
    y = grid.ravel()
    ia = np.repeat(np.arange(a), b * r)
    ib = np.tile(np.repeat(np.arange(b), r), a)
    one = np.ones((y.size, 1))
    da = np.eye(a)[ia][:, 1:]
    db = np.eye(b)[ib][:, 1:]
    dab = np.einsum("ni,nj->nij", da, db).reshape(y.size, -1)

    def rss(*blocks):
        X = np.hstack(blocks)
        beta = np.linalg.lstsq(X, y, rcond=None)[0]
        return ((y - X @ beta) ** 2).sum()

    r0, ra, rab, rfull = rss(one), rss(one, da), rss(one, da, db), rss(one, da, db, dab)
    mse = rfull / (a * b * (r - 1))
    return ((r0 - ra) / (a - 1) / mse, (ra - rab) / (b - 1) / mse, (rab - rfull) / ((a - 1) * (b - 1)) / mse)


def test_anova2():
    fa, fb, fab = kernels.anova2_f([[[1, 2], [1, 2]], [[1, 2], [1, 2]]])
    assert (fa.statistic, fb.statistic, fab.statistic) == (0.0, 0.0, 0.0)
    rng = np.random.default_rng(7)
    for shape in ((2, 2, 3), (3, 4, 2), (2, 5, 4)):
        grid = rng.normal(size=shape) + rng.normal(size=shape[:2])[:, :, None]
        ours = [s.statistic for s in kernels.anova2_f(grid)]
        assert np.allclose(ours, _anova2_oracle(grid), rtol=1e-10)
    with pytest.raises(Unbalanced):
        kernels.anova2_f([[[1, 2], [1, 2, 3]], [[1, 2], [1, 2]]])
    with pytest.raises(DimensionTooSmall):
        kernels.anova2_f(np.zeros((1, 2, 3)))


def test_linkages():
    rng = np.random.default_rng(11)
    for _ in range(20):
        x, y = rng.normal(size=8), rng.normal(size=8) * 1.7
        t = kernels.t_two_sample(x, y).statistic
        assert kernels.anova1_f([x, y]).statistic == pytest.approx(t * t, rel=1e-10)
        assert kernels.t_two_sample(y, x).statistic == -t
        assert kernels.f_two_sample(x, y).statistic * kernels.f_two_sample(y, x).statistic == pytest.approx(1.0)
        ys = (y - y.mean()) / y.std(ddof=1) * x.std(ddof=1) + y.mean()
        assert abs(kernels.t_two_sample(x, ys, "equal").statistic - kernels.t_two_sample(x, ys, "unequal").statistic) < 1e-12
