"""Block-border padding: statistic selection, halo application, outlier study.

Lorenzo prediction needs a "previous" neighbor on every low-index face of a
block; elements on those faces read synthetic halo values instead of real
data.  The halo is a single pre-quantized scalar per face, chosen as a
statistic (zero / min / max / mean) of the data at one of three scopes:
global (one scalar), block (one per block), or edge (one per block per
dimension, computed over that block's own low-index face).

Statistics are computed on the pre-quantized integer field with exact
integer arithmetic (means use an exact integer ratio, rounded half away
from zero).  Because the integer field survives a compression round trip
bit-for-bit, so do the scalars, which keeps recompression of decompressed
data byte-identical.  For min and max this is equivalent to quantizing the
float statistic, since quantization is monotone.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, VlzError
from .model import (
    BlockGrid,
    CompressionConfig,
    PaddingGranularity,
    PaddingPolicy,
    PaddingValue,
    QuantizedGrid,
)
from .quantize import prequantize


@dataclass(frozen=True)
class PaddingScalars:
    """Pre-quantized halo scalars, laid out per the policy granularity.

    global: values = [s]
    block:  values[block_index]
    edge:   values[block_index * ndims + dim]
    """

    policy: PaddingPolicy
    values: np.ndarray  # int64

    def __post_init__(self):
        if self.values.dtype != np.int64:
            raise ConfigError("padding scalars must be int64")


def _round_half_away_ratio(total: int, count: int) -> int:
    """Exact round-half-away-from-zero of the rational total/count."""
    if count <= 0:
        raise ConfigError("cannot average an empty selection")
    sign = -1 if total < 0 else 1
    q, r = divmod(abs(total), count)
    return sign * (q + (1 if 2 * r >= count else 0))


def _statistic(block: np.ndarray, kind: PaddingValue) -> int:
    if kind is PaddingValue.MINIMUM:
        return int(block.min())
    if kind is PaddingValue.MAXIMUM:
        return int(block.max())
    if kind is PaddingValue.MEAN:
        return _round_half_away_ratio(int(block.sum(dtype=np.int64)), block.size)
    raise ConfigError(f"no statistic defined for {kind}")


def compute_padding(
    data: np.ndarray,
    grid: BlockGrid,
    policy: PaddingPolicy,
    eb: float,
    prequantized: QuantizedGrid | None = None,
) -> PaddingScalars:
    """Compute halo scalars for every block face the policy requires.

    Statistics only ever see in-bounds elements; the ghost area of partial
    blocks is excluded.  ``prequantized`` avoids re-quantizing when the
    caller already holds the integer field.
    """
    if policy.value_kind is PaddingValue.ZERO:
        return PaddingScalars(policy, np.zeros(0, dtype=np.int64))
    if prequantized is None:
        prequantized = prequantize(data, eb)
    dq = prequantized.values
    nd = grid.descriptor.ndims

    if policy.granularity is PaddingGranularity.GLOBAL:
        return PaddingScalars(
            policy, np.array([_statistic(dq, policy.value_kind)], dtype=np.int64)
        )

    per_edge = policy.granularity is PaddingGranularity.EDGE
    out = np.empty(grid.block_count * (nd if per_edge else 1), dtype=np.int64)
    for bi in range(grid.block_count):
        origin = grid.block_origin(bi)
        extents = grid.block_extents(bi)
        sel = tuple(slice(o, o + e) for o, e in zip(origin, extents))
        block = dq[sel]
        if per_edge:
            for d in range(nd):
                face = block[tuple(slice(None) if a != d else 0 for a in range(nd))]
                out[bi * nd + d] = _statistic(np.atleast_1d(face), policy.value_kind)
        else:
            out[bi] = _statistic(block, policy.value_kind)
    return PaddingScalars(policy, out)


def apply_padding(
    scalars: PaddingScalars, grid: BlockGrid, block_index: int
) -> tuple[int, ...]:
    """Halo scalar for each low-index face of one block, as a per-dim tuple."""
    if not (0 <= block_index < grid.block_count):
        raise VlzError(f"block index {block_index} out of range")
    nd = grid.descriptor.ndims
    kind = scalars.policy.value_kind
    gran = scalars.policy.granularity
    if kind is PaddingValue.ZERO:
        return (0,) * nd
    if gran is PaddingGranularity.GLOBAL:
        return (int(scalars.values[0]),) * nd
    if gran is PaddingGranularity.BLOCK:
        return (int(scalars.values[block_index]),) * nd
    base = block_index * nd
    return tuple(int(scalars.values[base + d]) for d in range(nd))


def scalars_for_blocks(
    scalars: PaddingScalars, grid: BlockGrid, block_indices: np.ndarray, dim: int
) -> np.ndarray:
    """Vectorized :func:`apply_padding` for one face over many blocks."""
    kind = scalars.policy.value_kind
    gran = scalars.policy.granularity
    if kind is PaddingValue.ZERO:
        return np.zeros(block_indices.shape, dtype=np.int64)
    if gran is PaddingGranularity.GLOBAL:
        return np.full(block_indices.shape, scalars.values[0], dtype=np.int64)
    if gran is PaddingGranularity.BLOCK:
        return scalars.values[block_indices]
    return scalars.values[block_indices * grid.descriptor.ndims + dim]


@dataclass(frozen=True)
class PaddingOutlierStats:
    """Outlier census for one padding policy on one (data, config) pair."""

    policy: PaddingPolicy
    total_outliers: int
    border_outliers: int

    @property
    def border_pct(self) -> float:
        if self.total_outliers == 0:
            return 0.0
        return 100.0 * self.border_outliers / self.total_outliers


def outlier_report(
    data: np.ndarray,
    config: CompressionConfig,
    policies: list[PaddingPolicy] | None = None,
) -> list[tuple[PaddingOutlierStats, float]]:
    """Count outliers per padding policy and the reduction versus zero padding.

    Returns (stats, reduction_vs_zero_pct) pairs, zero padding first.  An
    element counts as a border outlier when any of its block-local
    coordinates is 0, i.e. when its prediction read at least one halo value.
    """
    from .vector import dualquant_vector

    if policies is None:
        policies = [
            PaddingPolicy(kind, gran)
            for kind in (PaddingValue.MINIMUM, PaddingValue.MAXIMUM, PaddingValue.MEAN)
            for gran in PaddingGranularity
        ]
    zero_policy = PaddingPolicy(PaddingValue.ZERO, PaddingGranularity.GLOBAL)
    ordered = [zero_policy] + [p for p in policies if p.value_kind is not PaddingValue.ZERO]

    rows: list[tuple[PaddingOutlierStats, float]] = []
    zero_total = 0
    for i, pol in enumerate(ordered):
        cfg = CompressionConfig(
            error_bound=config.error_bound,
            block_edge=config.block_edge,
            lane_width=config.lane_width if config.lane_width != 1 else 8,
            padding=pol,
            radius=config.radius,
            thread_count=config.thread_count,
        )
        _, stats = dualquant_vector(data, cfg, collect_border=True)
        report = PaddingOutlierStats(pol, stats[0], stats[1])
        if i == 0:
            zero_total = report.total_outliers
            reduction = 0.0
        elif zero_total == 0:
            reduction = 0.0
        else:
            reduction = 100.0 * (zero_total - report.total_outliers) / zero_total
        rows.append((report, reduction))
    return rows
