import math
from itertools import combinations

import numpy as np
import pytest

from permstat.errors import DimensionTooSmall
from permstat.resample import (
    PlanKind,
    bootstrap_plan,
    count_exact,
    evaluate_plan,
    gen_bootstrap,
    gen_partitions,
    gen_signflips,
    label_plan,
    partition_plan,
    random_words,
    resolve_threads,
    rowperm_plan,
    signflip_plan,
)


_MASK = 2**64 - 1


def _philox_block(ctr, key):
    """Reference Philox4x64-10 on Python ints."""
    c0, c1, c2, c3 = ctr
    k0, k1 = key
    for r in range(10):
        if r:
            k0 = (k0 + 0x9E3779B97F4A7C15) & _MASK
            k1 = (k1 + 0xBB67AE8584CAA73B) & _MASK
        p0 = 0xD2E7470EE14C6C93 * c0
        p1 = 0xCA5A826395121157 * c2
        c0, c1, c2, c3 = (
            (p1 >> 64) ^ c1 ^ k0,
            p1 & _MASK,
            (p0 >> 64) ^ c3 ^ k1,
            p0 & _MASK,
        )
    return [c0, c1, c2, c3]


def test_random_words_match_reference_philox():
    seed, stream = 0x1234_5678_9ABC_DEF0, 42
    draws = np.array([0, 1, 7, 12345])
    got = random_words(seed, stream, draws, 10)
    assert got.shape == (4, 10) and got.dtype == np.uint64
    for row, d in zip(got, draws):
        expected = []
        for block in range(3):
            expected += _philox_block((block, int(d), 0, 0), (seed, stream))
        assert [int(w) for w in row] == expected[:10]


def test_exact_signflips_are_complete():
    s = gen_signflips(3, 8)
    assert s.shape == (8, 3)
    assert len({tuple(r) for r in s}) == 8
    assert np.all(s[0] == 1)
    for n in range(2, 11):
        s = gen_signflips(n, 1000, exact_threshold=2**n)
        assert len({tuple(r) for r in s}) == 2**n


@pytest.mark.parametrize("nx,ny,total", [(2, 2, 6), (3, 3, 20), (4, 6, 210), (5, 7, 792)])
def test_exact_partitions_match_combinations(nx, ny, total):
    perms = gen_partitions(nx, ny, 100)
    assert perms.shape[0] == total
    got = {frozenset(r[:nx]) for r in perms}
    assert got == {frozenset(c) for c in combinations(range(nx + ny), nx)}
    assert list(perms[0]) == list(range(nx + ny))


def test_exact_rowperms_and_labels():
    plan = rowperm_plan(5, 100)
    assert plan.exact and plan.n_draws == 120
    assert len({tuple(r) for r in plan.generate()}) == 120
    plan = label_plan((3, 3, 3), 100)
    draws = plan.generate()
    assert plan.exact and draws.shape == (1680, 9)
    assert len({tuple(r) for r in draws}) == 1680
    assert np.all(np.sort(draws, axis=1) == np.repeat([0, 1, 2], 3))


def test_counts():
    assert count_exact(PlanKind.SIGNFLIP, 10) == 1024
    assert count_exact(PlanKind.PARTITION, 2, 2) == 6
    assert count_exact(PlanKind.PARTITION, 30, 30) == math.comb(60, 30)
    assert count_exact(PlanKind.ROWPERM, 6) == 720
    assert count_exact(PlanKind.LABELS, 3, 3, 3) == 1680


def test_monte_carlo_determinism_and_seed_sensitivity():
    a = gen_signflips(30, 5000, seed=1)
    b = gen_signflips(30, 5000, seed=1)
    c = gen_signflips(30, 5000, seed=2)
    assert a.shape == (5000, 30)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_draws_are_order_independent():
    plan = partition_plan(30, 30, 10000, seed=7)
    full = plan.generate()
    assert np.array_equal(plan.generate(4000, 4010), full[4000:4010])
    assert np.array_equal(plan.draw(9999), full[9999])
    assert np.all(np.sort(full, axis=1) == np.arange(60))


def test_partition_uniformity():
    perms = gen_partitions(2, 2, 60000, seed=11, exact_threshold=1)
    assert perms.shape == (60000, 4)
    keys = [frozenset(r[:2]) for r in perms]
    counts = {}
    for k in keys:
        counts[k] = counts.get(k, 0) + 1
    assert len(counts) == 6
    for c in counts.values():
        assert abs(c / 60000 - 1 / 6) < 0.01


def test_bootstrap_ranges_and_determinism():
    idx = gen_bootstrap(5, 1000, seed=3)
    assert idx.shape == (1000, 5)
    assert idx.min() >= 0 and idx.max() <= 4
    assert np.array_equal(idx, gen_bootstrap(5, 1000, seed=3))
    ind = gen_bootstrap(n_boot=2000, seed=3, paired=False, nx=4, ny=6)
    assert ind.shape == (2000, 10)
    assert ind[:, :4].max() < 4 and ind[:, 4:].max() < 6
    assert set(np.unique(ind[:, 4:])) == set(range(6))


def test_bootstrap_index_frequencies():
    idx = gen_bootstrap(7, 20000, seed=5)
    freq = np.bincount(idx.ravel(), minlength=7) / idx.size
    assert np.all(np.abs(freq - 1 / 7) < 0.005)


def test_small_dimensions_rejected():
    with pytest.raises(DimensionTooSmall):
        signflip_plan(1, 100)
    with pytest.raises(DimensionTooSmall):
        partition_plan(1, 5, 100)
    with pytest.raises(DimensionTooSmall):
        bootstrap_plan(100, paired=True, n=1)


def test_threaded_evaluation_matches_serial(monkeypatch):
    plan = partition_plan(20, 25, 3000, seed=9)
    data = np.arange(45.0)

    def fn(perm):
        return data[perm[:, :20]].sum(axis=1)[:, None]

    serial = evaluate_plan(plan, fn, cost_per_draw=5000, threads=1)
    threaded = evaluate_plan(plan, fn, cost_per_draw=5000, threads=4)
    assert np.array_equal(serial, threaded)
    monkeypatch.setenv("PERMSTAT_THREADS", "3")
    assert resolve_threads() == 3
    assert resolve_threads(2) == 2


def test_random_words_paths_agree(monkeypatch):
    import permstat.resample as mod

    draws = np.array([0, 3, 999, 2**40])
    vec = random_words(9, 7, draws, 23)
    monkeypatch.setattr(mod, "_VECTOR_MAX_BLOCKS", 0)
    assert np.array_equal(random_words(9, 7, draws, 23), vec)
