"""Deterministic permutation and bootstrap index generation.

Every draw is produced by a counter-based generator (Philox4x64-10, via
numpy's bit generator): the random words of draw ``i`` are the Philox
blocks at ``counter=(block, i, 0, 0)`` under ``key=(seed, stream)``.
A draw is therefore a pure function of the seed, its index and the problem dimensions, which lets callers evaluate any slice of a
plan on any thread and still obtain bit-identical results.

When the number of distinct rearrangements is at most ``exact_threshold``
the plans switch to exhaustive enumeration instead of sampling.
"""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Callable

import numpy as np

from .core import DEFAULT_EXACT_THRESHOLD
from .errors import DimensionTooSmall, ValidationError


class PlanKind(str, Enum):
    SIGNFLIP = "signflip"
    PARTITION = "partition"
    BOOTSTRAP = "bootstrap"
    ROWPERM = "rowperm"
    LABELS = "labels"


# distinct key words keep the schemes' random streams apart for the same seed
_STREAM = {
    PlanKind.SIGNFLIP: 0x5347,
    PlanKind.PARTITION: 0x5054,
    PlanKind.BOOTSTRAP: 0x4253,
    PlanKind.ROWPERM: 0x5250,
    PlanKind.LABELS: 0x4C42,
}


_U64_MAX = 2**64 - 1
_LO32 = np.uint64(0xFFFFFFFF)
_S32 = np.uint64(32)
_MULT = (np.uint64(0xD2E7470EE14C6C93), np.uint64(0xCA5A826395121157))
_WEYL = (0x9E3779B97F4A7C15, 0xBB67AE8584CAA73B)
# above this many blocks per draw numpy's C generator beats the vectorised rounds
_VECTOR_MAX_BLOCKS = 16


def _mulhilo(a: np.ndarray, b: np.uint64) -> tuple[np.ndarray, np.ndarray]:
    # 64x64 -> 128-bit product from 32-bit limbs
    a_lo, a_hi = a & _LO32, a >> _S32
    b_lo, b_hi = b & _LO32, b >> _S32
    ll = a_lo * b_lo
    lh = a_lo * b_hi
    hl = a_hi * b_lo
    mid = (ll >> _S32) + (lh & _LO32) + (hl & _LO32)
    hi = a_hi * b_hi + (lh >> _S32) + (hl >> _S32) + (mid >> _S32)
    return hi, a * b


def _philox_rows(block: int, draws: np.ndarray, seed: int, stream: int) -> np.ndarray:
    """Philox4x64-10 at counters ``(block, d, 0, 0)`` for every ``d``, vectorised over draws."""
    n = draws.size
    c0 = np.full(n, block, dtype=np.uint64)
    c1 = draws.copy()
    c2 = np.zeros(n, dtype=np.uint64)
    c3 = np.zeros(n, dtype=np.uint64)
    k0, k1 = seed, stream
    with np.errstate(over="ignore"):
        for r in range(10):
            if r:
                k0 = (k0 + _WEYL[0]) & _U64_MAX
                k1 = (k1 + _WEYL[1]) & _U64_MAX
            hi0, lo0 = _mulhilo(c0, _MULT[0])
            hi1, lo1 = _mulhilo(c2, _MULT[1])
            c0, c1, c2, c3 = hi1 ^ c1 ^ np.uint64(k0), lo1, hi0 ^ c3 ^ np.uint64(k1), lo0
    return np.stack([c0, c1, c2, c3], axis=1)


def random_words(seed: int, stream: int, draws: np.ndarray, width: int) -> np.ndarray:
    """Random 64-bit words, ``width`` per draw, for the given draw indices.

    Draw ``i`` takes the Philox4x64-10 blocks at counters ``(0, i, 0, 0)``,
    ``(1, i, 0, 0)``, ... under key ``(seed, stream)``. Narrow draws run the
    rounds vectorised over draws; wide ones use numpy's
    :class:`~numpy.random.Philox`, which produces the same words.
    """
    draws = np.asarray(draws, dtype=np.uint64).ravel()
    seed, stream = seed & _U64_MAX, stream & _U64_MAX
    n_blocks = -(-width // 4)
    if n_blocks <= _VECTOR_MAX_BLOCKS:
        out = np.concatenate([_philox_rows(b, draws, seed, stream) for b in range(n_blocks)], axis=1)
        return out[:, :width]
    bg = np.random.Philox(key=np.array([seed, stream], dtype=np.uint64))
    state = bg.state
    out = np.empty((draws.size, 4 * n_blocks), dtype=np.uint64)
    for j, d in enumerate(draws.tolist()):
        # numpy increments the 256-bit counter before each block
        start = [_U64_MAX, d - 1, 0, 0] if d else [_U64_MAX] * 4
        state["state"]["counter"] = np.array(start, dtype=np.uint64)
        state["buffer_pos"] = 4
        bg.state = state
        out[j] = bg.random_raw(4 * n_blocks)
    return out[:, :width]


def _uniform(words: np.ndarray) -> np.ndarray:
    return (words >> np.uint64(11)).astype(np.float64) * 2.0**-53


def _randint(words: np.ndarray, high: int) -> np.ndarray:
    return np.minimum((_uniform(words) * high).astype(np.int64), high - 1)


# -----------------------------------------------------------------------------
# Exhaustive enumerations (cached; returned read-only)
# -----------------------------------------------------------------------------
def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@lru_cache(maxsize=64)
def _all_signflips(n: int) -> np.ndarray:
    k = np.arange(2**n, dtype=np.int64)[:, None]
    bits = (k >> np.arange(n, dtype=np.int64)) & 1
    return _readonly((1 - 2 * bits).astype(np.int8))


@lru_cache(maxsize=64)
def _all_partitions(nx: int, ny: int) -> np.ndarray:
    total = nx + ny
    rows = []
    for comb in itertools.combinations(range(total), nx):
        chosen = set(comb)
        rows.append(list(comb) + [i for i in range(total) if i not in chosen])
    return _readonly(np.array(rows, dtype=np.int64).reshape(-1, total))


@lru_cache(maxsize=16)
def _all_rowperms(n: int) -> np.ndarray:
    return _readonly(np.array(list(itertools.permutations(range(n))), dtype=np.int64))


def _multiset_arrangements(counts: list[int], length: int):
    """Yield distinct arrangements of a multiset in lexicographic order."""
    out = [0] * length

    def rec(pos):
        if pos == length:
            yield tuple(out)
            return
        for g, c in enumerate(counts):
            if c:
                counts[g] -= 1
                out[pos] = g
                yield from rec(pos + 1)
                counts[g] += 1

    yield from rec(0)


@lru_cache(maxsize=32)
def _all_labelings(sizes: tuple[int, ...]) -> np.ndarray:
    rows = list(_multiset_arrangements(list(sizes), sum(sizes)))
    return _readonly(np.array(rows, dtype=np.int64).reshape(-1, sum(sizes)))


# -----------------------------------------------------------------------------
# Counting
# -----------------------------------------------------------------------------
def count_exact(kind: PlanKind | str, *dims: int) -> int:
    """Number of distinct rearrangements for a resampling scheme.

    ``signflip``: ``2**n``; ``partition``: ``C(nx+ny, nx)``; ``rowperm``:
    ``n!``; ``labels``: the multinomial coefficient of the group sizes. The
    count is returned as an exact Python integer.
    """
    kind = PlanKind(kind)
    if kind is PlanKind.SIGNFLIP:
        (n,) = dims
        return 2**n
    if kind is PlanKind.PARTITION:
        nx, ny = dims
        return math.comb(nx + ny, nx)
    if kind is PlanKind.ROWPERM:
        (n,) = dims
        return math.factorial(n)
    if kind is PlanKind.LABELS:
        count = math.factorial(sum(dims))
        for s in dims:
            count //= math.factorial(s)
        return count
    if kind is PlanKind.BOOTSTRAP:
        total = 1
        for s in dims:
            total *= s**s
        return total
    raise ValidationError(f"unknown plan kind {kind!r}")


# -----------------------------------------------------------------------------
# Plans
# -----------------------------------------------------------------------------
@dataclass(frozen=True)
class ResamplePlan:
    """Deterministic description of every draw of a resampling run.

    ``dims`` is ``(n,)`` for sign flips, row permutations and paired
    bootstraps, ``(nx, ny)`` for partitions and independent bootstraps, and
    the group sizes for label shuffles. In exact mode ``n_draws`` equals the
    number of distinct rearrangements and draw ``i`` is the ``i``-th of them;
    draw 0 is then always the observed arrangement.
    """

    kind: PlanKind
    n_draws: int
    dims: tuple[int, ...]
    seed: int
    exact: bool = False
    paired: bool = True

    @property
    def width(self) -> int:
        return sum(self.dims)

    def draw(self, i: int) -> np.ndarray:
        return self.generate(i, i + 1)[0]

    def generate(self, start: int = 0, stop: int | None = None) -> np.ndarray:
        """Materialise draws ``start`` to ``stop`` as a 2-D array."""
        stop = self.n_draws if stop is None else min(stop, self.n_draws)
        start = max(0, min(start, stop))
        if self.exact:
            return self._enumeration()[start:stop]
        idx = np.arange(start, stop, dtype=np.uint64)
        words = random_words(self.seed, _STREAM[self.kind], idx, self.width)
        if self.kind is PlanKind.SIGNFLIP:
            return np.where(words >> np.uint64(63), -1, 1).astype(np.int8)
        if self.kind in (PlanKind.PARTITION, PlanKind.ROWPERM):
            return np.argsort(words, axis=1, kind="stable")
        if self.kind is PlanKind.LABELS:
            base = np.repeat(np.arange(len(self.dims)), self.dims)
            return base[np.argsort(words, axis=1, kind="stable")]
        if self.kind is PlanKind.BOOTSTRAP:
            if self.paired:
                return _randint(words, self.dims[0])
            nx, ny = self.dims
            return np.concatenate([_randint(words[:, :nx], nx), _randint(words[:, nx:], ny)], axis=1)
        raise ValidationError(f"unknown plan kind {self.kind!r}")

    def _enumeration(self) -> np.ndarray:
        if self.kind is PlanKind.SIGNFLIP:
            return _all_signflips(self.dims[0])
        if self.kind is PlanKind.PARTITION:
            return _all_partitions(*self.dims)
        if self.kind is PlanKind.ROWPERM:
            return _all_rowperms(self.dims[0])
        if self.kind is PlanKind.LABELS:
            return _all_labelings(tuple(self.dims))
        raise ValidationError(f"{self.kind.value} plans have no exact enumeration")


def _make_plan(kind, dims, n_draws, seed, exact_threshold):
    total = count_exact(kind, *dims)
    if total <= exact_threshold:
        return ResamplePlan(kind, total, tuple(dims), int(seed), exact=True)
    return ResamplePlan(kind, int(n_draws), tuple(dims), int(seed))


def signflip_plan(n, n_perm, seed=0, exact_threshold=DEFAULT_EXACT_THRESHOLD) -> ResamplePlan:
    if n < 2:
        raise DimensionTooSmall(f"sign-flip scheme needs n >= 2, got {n}")
    return _make_plan(PlanKind.SIGNFLIP, (n,), n_perm, seed, exact_threshold)


def partition_plan(nx, ny, n_perm, seed=0, exact_threshold=DEFAULT_EXACT_THRESHOLD) -> ResamplePlan:
    if nx < 2 or ny < 2:
        raise DimensionTooSmall(f"each group needs at least 2 observations, got {nx} and {ny}")
    return _make_plan(PlanKind.PARTITION, (nx, ny), n_perm, seed, exact_threshold)


def rowperm_plan(n, n_perm, seed=0, exact_threshold=DEFAULT_EXACT_THRESHOLD) -> ResamplePlan:
    if n < 2:
        raise DimensionTooSmall(f"row permutation needs n >= 2, got {n}")
    return _make_plan(PlanKind.ROWPERM, (n,), n_perm, seed, exact_threshold)


def label_plan(sizes, n_perm, seed=0, exact_threshold=DEFAULT_EXACT_THRESHOLD) -> ResamplePlan:
    sizes = tuple(int(s) for s in sizes)
    if len(sizes) < 2 or min(sizes) < 1:
        raise DimensionTooSmall("label shuffling needs at least two non-empty groups")
    return _make_plan(PlanKind.LABELS, sizes, n_perm, seed, exact_threshold)


def bootstrap_plan(n_boot, seed=0, paired=True, n=None, nx=None, ny=None) -> ResamplePlan:
    if paired:
        if n is None or n < 2:
            raise DimensionTooSmall(f"bootstrap needs n >= 2, got {n}")
        return ResamplePlan(PlanKind.BOOTSTRAP, int(n_boot), (int(n),), int(seed), paired=True)
    if nx is None or ny is None or nx < 2 or ny < 2:
        raise DimensionTooSmall(f"bootstrap needs group sizes >= 2, got {nx} and {ny}")
    return ResamplePlan(PlanKind.BOOTSTRAP, int(n_boot), (int(nx), int(ny)), int(seed), paired=False)


# -----------------------------------------------------------------------------
# Convenience generators
# -----------------------------------------------------------------------------
def gen_signflips(n, n_perm, seed=0, exact_threshold=DEFAULT_EXACT_THRESHOLD) -> np.ndarray:
    """Sign vectors (entries +1/-1), one row per draw.

    Returns all ``2**n`` patterns when that count is at most
    ``exact_threshold``, otherwise ``n_perm`` random patterns.
    """
    return signflip_plan(n, n_perm, seed, exact_threshold).generate()


def gen_partitions(nx, ny, n_perm, seed=0, exact_threshold=DEFAULT_EXACT_THRESHOLD) -> np.ndarray:
    """Index permutations of ``0..nx+ny-1``; the first ``nx`` form pseudo-group X."""
    return partition_plan(nx, ny, n_perm, seed, exact_threshold).generate()


def gen_bootstrap(n=None, n_boot=10000, seed=0, paired=True, nx=None, ny=None) -> np.ndarray:
    """Bootstrap index vectors drawn with replacement.

    Paired mode resamples ``n`` pair indices jointly. Independent mode
    returns rows of length ``nx + ny``: the first ``nx`` entries index X
    (values in ``0..nx-1``), the rest index Y (values in ``0..ny-1``).
    """
    return bootstrap_plan(n_boot, seed, paired, n=n, nx=nx, ny=ny).generate()


# -----------------------------------------------------------------------------
# Blocked evaluation
# -----------------------------------------------------------------------------
_BLOCK_ELEMENTS = 2_000_000


def resolve_threads(threads: int | None = None) -> int:
    """Worker count: explicit value, else ``PERMSTAT_THREADS``, else 1."""
    if threads is None:
        env = os.environ.get("PERMSTAT_THREADS", "").strip()
        threads = int(env) if env else 1
    return max(1, int(threads))


def evaluate_plan(
    plan: ResamplePlan,
    fn: Callable[[np.ndarray], np.ndarray],
    cost_per_draw: int,
    threads: int | None = None,
    start: int = 0,
    stop: int | None = None,
) -> np.ndarray:
    """Apply ``fn`` to consecutive blocks of draws and stack the results.

    ``fn`` maps a ``(block, width)`` array of draws to a ``(block, ...)``
    array. Because draws are addressed by index, the output does not depend
    on the block size or on how many threads evaluate the blocks.
    """
    stop = plan.n_draws if stop is None else min(stop, plan.n_draws)
    block = max(1, min(stop - start, _BLOCK_ELEMENTS // max(1, cost_per_draw)))
    bounds = [(s, min(s + block, stop)) for s in range(start, stop, block)]

    def run(bound):
        return fn(plan.generate(*bound))

    threads = resolve_threads(threads)
    if threads == 1 or len(bounds) <= 1:
        parts = [run(b) for b in bounds]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, bounds))
    return np.concatenate(parts, axis=0)
