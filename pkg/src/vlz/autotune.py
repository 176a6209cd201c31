"""Block-size / lane-width autotuning by timing sampled blocks.

The tuner runs the dual-quant kernel (pre-quantize, predict, post-quantize)
on a random sample of blocks for every candidate configuration, repeats the
measurement a few times, and picks the configuration with the smallest mean
time.  Ties go to the larger block edge, then the larger lane width.

Measurement layout: iterations form the outermost loop, then sample
ordinals, then configurations, so every configuration sees the same cache
state per sample round.  Each configuration reuses one scratch allocation
across samples to keep the allocator out of the numbers.  The timer is
injectable; tests drive the tuner with scripted clocks.

Across time-steps of a simulation the winning configuration is mostly
stable, so a history of earlier reports can narrow the space to the top-k
most frequently chosen configurations before re-tuning.
"""

from __future__ import annotations

import math
import time
from collections import Counter
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigError
from .model import (
    BlockGrid,
    CompressionConfig,
    VALID_BLOCK_EDGES,
    VECTOR_LANE_WIDTHS,
    build_block_grid,
    resolve_error_bound,
)
from .model import ArrayDescriptor
from .padding import compute_padding, apply_padding
from .quantize import prequantize
from .vector import _segment_pass

TUNE_CSV_FIELDS = ("block", "lanes", "mean_s", "std_s", "chosen")


@dataclass(frozen=True)
class TuneSpace:
    """Candidate (block_edge, lane_width) pairs, deduplicated by effect."""

    configs: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if not self.configs:
            raise ConfigError("tune space is empty")
        for b, l in self.configs:
            if b not in VALID_BLOCK_EDGES:
                raise ConfigError(f"invalid block edge {b} in tune space")
            if l not in VECTOR_LANE_WIDTHS:
                raise ConfigError(f"invalid lane width {l} in tune space")

    @classmethod
    def build(
        cls,
        block_edges: Sequence[int] = VALID_BLOCK_EDGES,
        lane_widths: Sequence[int] = VECTOR_LANE_WIDTHS,
    ) -> "TuneSpace":
        seen = {}
        for b in sorted(block_edges):
            for l in sorted(lane_widths):
                eff = min(l, b)  # wide lanes on a small block fall back
                seen.setdefault((b, eff), None)
        return cls(tuple(seen.keys()))


@dataclass(frozen=True)
class TuneReport:
    """Per-configuration timing stats and the selected configuration."""

    configs: tuple[tuple[int, int], ...]
    mean_s: tuple[float, ...]
    std_s: tuple[float, ...]
    chosen: tuple[int, int]
    sample_fraction: float
    iterations: int
    seed: int
    tuning_seconds: float
    tuning_fraction: float | None = None

    def csv_rows(self) -> list[list]:
        rows = []
        for cfg, m, s in zip(self.configs, self.mean_s, self.std_s):
            rows.append(
                [cfg[0], cfg[1], f"{m:.9f}", f"{s:.9f}", int(cfg == self.chosen)]
            )
        return rows


def sample_blocks(grid: BlockGrid, fraction: float, seed: int) -> np.ndarray:
    """Uniform sample of block indices without replacement, at least one."""
    if not (0.0 < fraction <= 1.0):
        raise ConfigError(f"sample fraction must be in (0, 1], got {fraction}")
    k = max(1, math.ceil(fraction * grid.block_count))
    rng = np.random.default_rng(seed)
    picks = rng.choice(grid.block_count, size=k, replace=False)
    return np.sort(picks)


class _BlockRunner:
    """Times the dual-quant kernel on single blocks with reused scratch."""

    def __init__(self, data, dq, grid, scalars, lanes, radius, eb):
        self.data = data
        self.dq = dq
        self.grid = grid
        self.scalars = scalars
        self.eff = min(lanes, grid.block_edge)
        self.radius = radius
        self.eb = eb
        b = grid.block_edge
        nd = grid.descriptor.ndims
        self.tq = np.zeros((b + 1,) * nd, dtype=np.int64)
        self.tf = np.zeros((b,) * nd, dtype=np.float32)
        self.codes = np.empty((b,) * nd, dtype=np.uint32)
        self.outl = np.empty((b,) * nd, dtype=bool)

    def run(self, block_index: int) -> None:
        grid = self.grid
        nd = grid.descriptor.ndims
        b = grid.block_edge
        origin = grid.block_origin(block_index)
        extents = grid.block_extents(block_index)
        sel = tuple(slice(o, o + e) for o, e in zip(origin, extents))
        halo = apply_padding(self.scalars, grid, block_index)
        for d in range(nd):
            face = tuple(slice(None) if a != d else 0 for a in range(nd))
            self.tq[face] = halo[d]
        interior = tuple(slice(1, 1 + e) for e in extents)
        # pre-quantization is part of the timed kernel
        blk = self.data[sel].astype(np.float64)
        q = blk / (2.0 * self.eb)
        self.tq[interior] = np.floor(np.abs(q) + 0.5) * np.sign(q)
        self.tf[tuple(slice(0, e) for e in extents)] = self.data[sel]
        _segment_pass(
            self.tq, self.tf, nd, b, self.eff, self.radius, self.eb,
            self.codes, self.outl,
        )


def autotune(
    data: np.ndarray,
    space: TuneSpace,
    fraction: float = 0.10,
    iterations: int = 3,
    seed: int = 1,
    timer: Callable[[], float] = time.perf_counter,
    base: CompressionConfig | None = None,
) -> TuneReport:
    """Pick the fastest (block_edge, lane_width) by sampling blocks."""
    if iterations < 1:
        raise ConfigError(f"iterations must be >= 1, got {iterations}")
    if base is None:
        from .model import ErrorBound

        base = CompressionConfig(ErrorBound.absolute(1e-4))
    eb = resolve_error_bound(base.error_bound, data)
    qgrid = prequantize(data, eb)

    runners = []
    samples = []
    for b, l in space.configs:
        grid = build_block_grid(ArrayDescriptor.from_array(data), b)
        scalars = compute_padding(data, grid, base.padding, eb, prequantized=qgrid)
        runners.append(_BlockRunner(data, qgrid.values, grid, scalars, l, base.radius, eb))
        samples.append(sample_blocks(grid, fraction, seed))

    n_cfg = len(space.configs)
    per_iter = np.zeros((n_cfg, iterations), dtype=np.float64)
    max_samples = max(len(s) for s in samples)

    t_start = timer()
    for it in range(iterations):
        for ordinal in range(max_samples):
            for ci in range(n_cfg):
                if ordinal >= len(samples[ci]):
                    continue
                t0 = timer()
                runners[ci].run(int(samples[ci][ordinal]))
                t1 = timer()
                per_iter[ci, it] += t1 - t0
    t_end = timer()

    means = per_iter.mean(axis=1)
    stds = per_iter.std(axis=1)
    order = sorted(
        range(n_cfg),
        key=lambda ci: (means[ci], -space.configs[ci][0], -space.configs[ci][1]),
    )
    best = order[0]
    return TuneReport(
        configs=space.configs,
        mean_s=tuple(float(m) for m in means),
        std_s=tuple(float(s) for s in stds),
        chosen=space.configs[best],
        sample_fraction=fraction,
        iterations=iterations,
        seed=seed,
        tuning_seconds=float(t_end - t_start),
    )


def narrowed_autotune(
    history: Sequence[TuneReport | tuple[int, int]],
    space: TuneSpace | None = None,
    k: int = 2,
) -> TuneSpace:
    """Restrict the space to the k most frequently chosen past configs."""
    if space is None:
        space = TuneSpace.build()
    chosen = [
        h.chosen if isinstance(h, TuneReport) else tuple(h) for h in history
    ]
    if not chosen:
        return space
    counts = Counter(chosen)
    ranked = sorted(counts, key=lambda c: (-counts[c], -c[0], -c[1]))
    keep = [c for c in ranked[:k] if c in space.configs]
    if not keep:
        return space
    return TuneSpace(tuple(c for c in space.configs if c in keep))


def apply_chosen(config: CompressionConfig, report: TuneReport) -> CompressionConfig:
    """A copy of ``config`` running at the tuned block edge and lane width."""
    block, lanes = report.chosen
    return replace(config, block_edge=block, lane_width=lanes)
