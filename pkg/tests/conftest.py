"""Shared fixtures: the random-array corpus and independent test oracles.

The corpus is the one test corpus used by the acceptance suite: at least
200 arrays covering 1D/2D/3D, sizes up to 64^3, values within [-1e3, 1e3],
a mix of uniform noise (incompressible, outlier-heavy) and smooth fields
(compressible), plus degenerate shapes.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

ACCEPTANCE_EBS = (1e-2, 1e-4, 1e-5)


def _log_uniform(rng, lo, hi):
    return int(round(math.exp(rng.uniform(math.log(lo), math.log(hi)))))


def _smooth(rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    offset = rng.uniform(-700, 700)
    amp = rng.uniform(1.0, 40.0)
    axes = [np.linspace(0.0, rng.uniform(1, 8), s) for s in shape]
    mesh = np.add.reduce(np.meshgrid(*axes, indexing="ij")) if shape else 0.0
    field = offset + amp * np.sin(mesh) + 0.05 * amp * np.cos(3.0 * mesh)
    return np.clip(field, -1e3, 1e3).astype(np.float32)


def _noise(rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    return rng.uniform(-1e3, 1e3, shape).astype(np.float32)


def make_corpus() -> list[np.ndarray]:
    rng = np.random.default_rng(20260808)
    arrays: list[np.ndarray] = []
    caps = {1: 20000, 2: 150, 3: 36}
    for i in range(188):
        nd = i % 3 + 1
        shape = tuple(_log_uniform(rng, 1, caps[nd]) for _ in range(nd))
        maker = _noise if i % 2 else _smooth
        arrays.append(maker(rng, shape))
    # deliberate edge shapes
    arrays.append(_smooth(rng, (64, 64, 64)))
    arrays.append(_noise(rng, (64, 64, 64)))
    arrays.append(_noise(rng, (63, 65, 9)))
    arrays.append(_smooth(rng, (1,)))
    arrays.append(_noise(rng, (2,)))
    arrays.append(_smooth(rng, (8,)))
    arrays.append(_noise(rng, (9,)))
    arrays.append(_smooth(rng, (65,)))
    arrays.append(_noise(rng, (1, 1)))
    arrays.append(_smooth(rng, (1, 129)))
    arrays.append(_noise(rng, (5, 1, 7)))
    arrays.append(_smooth(rng, (100000,)))
    return arrays


@pytest.fixture(scope="session")
def corpus() -> list[np.ndarray]:
    return make_corpus()


@pytest.fixture(scope="session")
def corpus_small(corpus) -> list[np.ndarray]:
    """Cheap subset for cross products that multiply runtime."""
    return [a for a in corpus if a.size <= 4096][:60]


# ---------------------------------------------------------------------------
# Independent oracles (no imports from vlz; plain Python on purpose)
# ---------------------------------------------------------------------------


def oracle_round_half_away(q: float) -> int:
    if q > 0:
        return math.floor(q + 0.5)
    if q < 0:
        return -math.floor(-q + 0.5)
    return 0


def oracle_quantize(v: float, eb: float) -> int:
    return oracle_round_half_away(v / (2.0 * eb))


def oracle_tile_blocks(dims, b):
    """Brute-force tiler: every element assigned to exactly one block."""
    owners = {}
    for idx in np.ndindex(*dims):
        owners[idx] = tuple(c // b for c in idx)
    blocks = sorted(set(owners.values()))
    return owners, blocks


def oracle_dualquant_outliers(data, eb, block_edge, radius, padding):
    """Independent dual-quant: returns set of outlier positions.

    ``padding`` is "zero" or "gmean" (global mean over the quantized field,
    rounded half away from zero with exact rationals).  Only supports what
    the tests need; written against the algorithm, not the library.
    """
    from fractions import Fraction

    dims = data.shape
    nd = data.ndim
    dq = {idx: oracle_quantize(float(data[idx]), eb) for idx in np.ndindex(*dims)}
    if padding == "zero":
        pad = 0
    elif padding == "gmean":
        mean = Fraction(sum(dq.values()), len(dq))
        sign = -1 if mean < 0 else 1
        pad = sign * int(abs(mean) + Fraction(1, 2))  # half rounds away from 0
    else:
        raise ValueError(padding)

    def val(idx, base):
        # neighbors outside the base element's own block read the halo
        for d, c in enumerate(idx):
            if c < 0 or c // block_edge != base[d] // block_edge:
                return pad
        return dq[idx]

    outliers = set()
    for idx in np.ndindex(*dims):
        if nd == 1:
            (i,) = idx
            p = val((i - 1,), idx)
        elif nd == 2:
            i, j = idx
            p = (
                val((i, j - 1), idx)
                + val((i - 1, j), idx)
                - val((i - 1, j - 1), idx)
            )
        else:
            k, i, j = idx
            p = (
                val((k, i, j - 1), idx)
                + val((k, i - 1, j), idx)
                + val((k - 1, i, j), idx)
                - val((k, i - 1, j - 1), idx)
                - val((k - 1, i, j - 1), idx)
                - val((k - 1, i - 1, j), idx)
                + val((k - 1, i - 1, j - 1), idx)
            )
        delta = dq[idx] - p
        w = np.float32((2.0 * dq[idx]) * eb)
        if abs(delta) > radius - 1 or abs(float(w) - float(data[idx])) > eb:
            outliers.add(idx)
    return outliers


def oracle_optimal_prefix_bits(freqs: list[int]) -> int:
    """Brute-force minimum total bits over all prefix-free length vectors.

    Searches non-decreasing length assignments against frequencies sorted
    in non-increasing order (an optimal code can always be arranged that
    way), pruning on the Kraft inequality.
    """
    fs = sorted(freqs, reverse=True)
    n = len(fs)
    if n == 1:
        return fs[0]  # one symbol still needs 1 bit per occurrence here
    best = math.inf
    max_len = n - 1

    def dfs(i, prev_len, kraft_left, cost):
        # kraft_left is the remaining capacity in units of 2^-max_len
        nonlocal best
        if cost >= best:
            return
        if i == n:
            best = cost
            return
        for l in range(prev_len, max_len + 1):
            unit = 2 ** (max_len - l)
            if unit > kraft_left:
                continue
            dfs(i + 1, l, kraft_left - unit, cost + fs[i] * l)

    dfs(0, 1, 2**max_len, 0)
    return int(best)
