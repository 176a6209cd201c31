"""Quality and performance measurement: error, PSNR, rate, OI, kernel bench.

The operational-intensity table is the normative operation count for the
dual-quant kernel in this codebase, cross-checked against the scalar
kernel's instrumented counters:

  conservative: 1 float arithmetic op per element (the error-bound scaling
                divide).  Lorenzo prediction and post-quantization act on
                integers and contribute no float arithmetic, so the count
                is dimension-independent.
  lenient:      adds the round, the float->int cast, and 2 comparisons per
                element (outlier-range check, narrowed-reconstruction
                check), for 5 ops per element.

  bytes/element: 4 (read datum) + 4 (write the 32-bit grid value) + 2
                 (write the 16-bit code) = 10, plus 4 bytes per outlier
                 amortized over all elements.

The float multiply feeding the narrowed-reconstruction check is container
safety bookkeeping, not modeled kernel arithmetic, and is deliberately
outside these buckets.
"""

from __future__ import annotations

import math
import statistics
import time
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DegenerateRangeError
from .model import ArrayDescriptor, CompressionConfig

CONSERVATIVE_OPS_PER_ELEMENT = 1
LENIENT_ROUNDS_PER_ELEMENT = 1
LENIENT_CASTS_PER_ELEMENT = 1
LENIENT_COMPARISONS_PER_ELEMENT = 2
LENIENT_OPS_PER_ELEMENT = (
    CONSERVATIVE_OPS_PER_ELEMENT
    + LENIENT_ROUNDS_PER_ELEMENT
    + LENIENT_CASTS_PER_ELEMENT
    + LENIENT_COMPARISONS_PER_ELEMENT
)
BASE_BYTES_PER_ELEMENT = 10  # 4 read + 4 grid write + 2 code write
OUTLIER_BYTES = 4

BENCH_CSV_FIELDS = (
    "dataset",
    "dims",
    "eb",
    "block",
    "lanes",
    "threads",
    "time_ms",
    "MBps",
    "gflops_cons",
    "gflops_len",
)
RD_CSV_FIELDS = ("eb", "rate_bits", "psnr_db", "outliers", "outlier_border_pct")


def rate_distortion_row(
    eb: float,
    container_bytes: int,
    descriptor: "ArrayDescriptor",
    psnr_db: float,
    outliers: int,
    outlier_border_pct: float,
) -> list:
    """One row of the rate-distortion CSV (see RD_CSV_FIELDS)."""
    return [
        repr(eb),
        f"{8.0 * container_bytes / descriptor.element_count:.6f}",
        "inf" if math.isinf(psnr_db) else f"{psnr_db:.4f}",
        outliers,
        f"{outlier_border_pct:.2f}",
    ]


def max_abs_error(original: np.ndarray, reconstructed: np.ndarray) -> float:
    """Largest per-element absolute deviation, in float64."""
    if original.shape != reconstructed.shape:
        raise ConfigError(
            f"shape mismatch: {original.shape} vs {reconstructed.shape}"
        )
    if original.size == 0:
        return 0.0
    return float(
        np.max(np.abs(original.astype(np.float64) - reconstructed.astype(np.float64)))
    )


def psnr(original: np.ndarray, reconstructed: np.ndarray) -> float:
    """Peak signal-to-noise ratio in dB, +inf for identical arrays."""
    if original.shape != reconstructed.shape:
        raise ConfigError(
            f"shape mismatch: {original.shape} vs {reconstructed.shape}"
        )
    o = original.astype(np.float64)
    r = reconstructed.astype(np.float64)
    vrange = float(o.max() - o.min())
    if vrange == 0.0:
        raise DegenerateRangeError("PSNR is undefined for a constant original")
    mse = float(np.mean((o - r) ** 2))
    if mse == 0.0:
        return math.inf
    return 20.0 * math.log10(vrange) - 10.0 * math.log10(mse)


def rate(container: bytes | int, descriptor: ArrayDescriptor) -> float:
    """Compressed bits per original element."""
    n = container if isinstance(container, int) else len(container)
    return 8.0 * n / descriptor.element_count


def ratio(original_bytes: int, container_bytes: int) -> float:
    """Compression ratio: original bytes over container bytes."""
    if container_bytes <= 0:
        raise ConfigError("container byte count must be positive")
    return original_bytes / container_bytes


@dataclass(frozen=True)
class OIBounds:
    """Analytical operational-intensity bracket for the dual-quant kernel."""

    conservative_ops: int
    lenient_ops: int
    bytes_per_element: float

    @property
    def conservative(self) -> float:
        return self.conservative_ops / self.bytes_per_element

    @property
    def lenient(self) -> float:
        return self.lenient_ops / self.bytes_per_element


def oi_bounds(
    descriptor: ArrayDescriptor, block_edge: int, outlier_fraction: float = 0.0
) -> OIBounds:
    """Conservative and lenient flops-per-byte for this geometry.

    Both op counts are per element and independent of dimensionality (the
    extra Lorenzo terms in higher dimensions are integer work).  The byte
    count grows with the outlier fraction, so OI can only shrink as padding
    gets worse.  ``block_edge`` participates only in validation; the model
    amortizes halo traffic to zero.
    """
    from .model import VALID_BLOCK_EDGES

    if block_edge not in VALID_BLOCK_EDGES:
        raise ConfigError(f"block edge must be one of {VALID_BLOCK_EDGES}")
    if not (0.0 <= outlier_fraction <= 1.0):
        raise ConfigError("outlier fraction must be within [0, 1]")
    return OIBounds(
        conservative_ops=CONSERVATIVE_OPS_PER_ELEMENT,
        lenient_ops=LENIENT_OPS_PER_ELEMENT,
        bytes_per_element=BASE_BYTES_PER_ELEMENT + OUTLIER_BYTES * outlier_fraction,
    )


@dataclass(frozen=True)
class BenchResult:
    """Median-of-repetitions timing of the dual-quant stage only."""

    config: CompressionConfig
    element_count: int
    time_s: float
    time_std_s: float
    mb_per_s: float
    gflops_conservative: float
    gflops_lenient: float

    def csv_row(self, dataset: str, dims: tuple[int, ...], eb: float) -> list:
        return [
            dataset,
            "x".join(str(d) for d in dims),
            repr(eb),
            self.config.block_edge,
            self.config.lane_width,
            self.config.thread_count,
            f"{self.time_s * 1e3:.3f}",
            f"{self.mb_per_s:.1f}",
            f"{self.gflops_conservative:.4f}",
            f"{self.gflops_lenient:.4f}",
        ]


def bench_kernel(
    data: np.ndarray, config: CompressionConfig, repetitions: int = 10
) -> BenchResult:
    """Time the prediction/quantization kernel alone (no entropy stage)."""
    from .kernel import dualquant_scalar
    from .vector import dualquant_vector

    if repetitions < 3:
        raise ConfigError(f"bench needs at least 3 repetitions, got {repetitions}")
    run = dualquant_scalar if config.lane_width == 1 else dualquant_vector
    times = []
    for _ in range(repetitions):
        t0 = time.perf_counter()
        run(data, config)
        times.append(time.perf_counter() - t0)
    med = statistics.median(times)
    std = statistics.pstdev(times)
    n = data.size
    return BenchResult(
        config=config,
        element_count=n,
        time_s=med,
        time_std_s=std,
        mb_per_s=data.nbytes / med / 1e6,
        gflops_conservative=CONSERVATIVE_OPS_PER_ELEMENT * n / med / 1e9,
        gflops_lenient=LENIENT_OPS_PER_ELEMENT * n / med / 1e9,
    )
