"""Scalar reference kernel: one element at a time, straight off the math.

This is the canonical implementation the lane kernel must reproduce
byte-for-byte.  It is deliberately plain Python per element so it can serve
as the equivalence oracle; use :mod:`vlz.vector` for anything large.

Per element the pipeline is:

  1. pre-quantize:   d = round(v / (2 eb)), float64, ties away from zero
  2. predict:        p = first-order Lorenzo stencil over preceding
                     neighbors, halo scalars standing in across block faces
  3. post-quantize:  delta = d - p; in-range deltas become the code
                     delta + radius, everything else becomes an outlier

An element also becomes an outlier when its narrowed float32 reconstruction
would land farther than eb from the original value (see :mod:`vlz.quantize`).
Outliers carry the verbatim float32 datum, so they reconstruct exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BoundTooSmallError, ConfigError
from .model import (
    ArrayDescriptor,
    CodeStream,
    CompressionConfig,
    QuantizedGrid,
    build_block_grid,
    resolve_error_bound,
)
from .padding import apply_padding, compute_padding
from .quantize import _OVERFLOW_LIMIT, round_half_away


@dataclass
class KernelCounters:
    """Per-element operation census of the scalar kernel.

    Matches the operation table behind :func:`vlz.metrics.oi_bounds`:
    arithmetic covers float arithmetic on data values (the error-bound
    scaling), and comparisons cover the outlier-range check plus the
    narrowed-reconstruction check.  The reconstruction product feeding that
    second check is bookkeeping for container safety, not part of the
    modeled kernel arithmetic, so it is not counted.
    """

    arith: int = 0
    rounds: int = 0
    casts: int = 0
    comparisons: int = 0


@dataclass(frozen=True)
class PaddedBlock:
    """One block's pre-quantized values plus low-face halo scalars.

    ``halo[d]`` pads the face crossed when coordinate ``d`` goes negative.
    A neighbor below several faces at once (an edge or corner of the halo
    region) takes the scalar of the highest such dimension, matching the
    fill order of the staged tiles in the lane kernel.
    """

    extents: tuple[int, ...]
    halo: tuple[int, ...]
    values: np.ndarray  # int64, shape == extents

    def value_at(self, coords: tuple[int, ...]) -> int:
        pad_dim = -1
        for d, c in enumerate(coords):
            if c < 0:
                pad_dim = d
        if pad_dim >= 0:
            return self.halo[pad_dim]
        return int(self.values[coords])


def lorenzo_predict(block: PaddedBlock, index: tuple[int, ...]) -> int:
    """First-order Lorenzo prediction from preceding neighbors (exact ints)."""
    v = block.value_at
    nd = len(index)
    if nd == 1:
        (i,) = index
        return v((i - 1,))
    if nd == 2:
        i, j = index
        return v((i, j - 1)) + v((i - 1, j)) - v((i - 1, j - 1))
    k, i, j = index
    return (
        v((k, i, j - 1))
        + v((k, i - 1, j))
        + v((k - 1, i, j))
        - v((k, i - 1, j - 1))
        - v((k - 1, i, j - 1))
        - v((k - 1, i - 1, j))
        + v((k - 1, i - 1, j - 1))
    )


def postquantize(block: PaddedBlock, radius: int) -> tuple[np.ndarray, list[int]]:
    """Post-quantize one block: codes plus pre-quantized outlier values.

    Pure Algorithm-level post-quantization: an element is an outlier here
    only when its prediction delta falls outside [-(radius-1), radius-1].
    Codes are returned in the block shape; raveling them yields canonical
    (row-major) order, with outliers listed in that same order.
    """
    codes = np.zeros(block.extents, dtype=np.uint32)
    outliers: list[int] = []
    for index in np.ndindex(*block.extents):
        dq = block.value_at(index)
        delta = dq - lorenzo_predict(block, index)
        if abs(delta) <= radius - 1:
            codes[index] = delta + radius
        else:
            outliers.append(dq)
    return codes, outliers


def dualquant_scalar(
    data: np.ndarray,
    config: CompressionConfig,
    counters: KernelCounters | None = None,
) -> CodeStream:
    """Full scalar pipeline at lane width 1; the equivalence oracle."""
    desc = ArrayDescriptor.from_array(data)
    eb = resolve_error_bound(config.error_bound, data)
    grid = build_block_grid(desc, config.block_edge)
    radius = config.radius
    twoeb = 2.0 * eb

    flat = data.ravel()
    dq = np.empty(desc.element_count, dtype=np.int64)
    for i in range(desc.element_count):
        v = float(flat[i])
        if not math.isfinite(v):
            raise ConfigError(f"data contains a non-finite value at flat index {i}")
        q = v / twoeb
        if abs(q) >= _OVERFLOW_LIMIT:
            raise BoundTooSmallError(i, v, eb)
        dq[i] = round_half_away(q)
        if counters is not None:
            counters.arith += 1
            counters.rounds += 1
            counters.casts += 1
    dq = dq.reshape(desc.dims)

    qgrid_stats = compute_padding(
        data, grid, config.padding, eb,
        prequantized=QuantizedGrid(values=dq, descriptor=desc, resolved_abs=eb),
    )

    codes = np.empty(desc.element_count, dtype=np.uint32)
    outlier_values: list[np.float32] = []
    outlier_counts = np.zeros(grid.block_count, dtype=np.int64)
    pos = 0
    for bi in range(grid.block_count):
        origin = grid.block_origin(bi)
        extents = grid.block_extents(bi)
        sel = tuple(slice(o, o + e) for o, e in zip(origin, extents))
        block = PaddedBlock(extents, apply_padding(qgrid_stats, grid, bi), dq[sel])
        src = data[sel]
        n_out = 0
        for index in np.ndindex(*extents):
            d = block.value_at(index)
            delta = d - lorenzo_predict(block, index)
            w = np.float32((2.0 * d) * eb)
            in_range = abs(delta) <= radius - 1
            in_bound = abs(float(w) - float(src[index])) <= eb
            if counters is not None:
                counters.comparisons += 2
            if in_range and in_bound:
                codes[pos] = delta + radius
            else:
                codes[pos] = 0
                outlier_values.append(src[index])
                n_out += 1
            pos += 1
        outlier_counts[bi] = n_out

    return CodeStream(
        codes=codes,
        outlier_values=np.array(outlier_values, dtype=np.float32),
        outlier_counts=outlier_counts,
        grid=grid,
        resolved_abs=eb,
        radius=radius,
        scalars=qgrid_stats,
    )
