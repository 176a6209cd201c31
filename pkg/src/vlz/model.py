"""Shared data model: array geometry, error bounds, block tiling, configuration.

All types are frozen dataclasses; instances are safe to share across threads.
Arrays are float32, row-major, with the last dimension varying fastest.
Blocks tile the array in row-major block-index order and, within a block,
elements are visited in row-major order.  That traversal is the canonical
serialization order used everywhere downstream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING

import numpy as np

from .errors import ConfigError, DegenerateRangeError

if TYPE_CHECKING:
    from .padding import PaddingScalars

VALID_BLOCK_EDGES = (8, 16, 32, 64)
VALID_LANE_WIDTHS = (1, 4, 8, 16)
VECTOR_LANE_WIDTHS = (4, 8, 16)
DEFAULT_RADIUS = 32768  # 2R = 65536 bins, codes fit in 16 bits


class ErrorBoundMode(Enum):
    ABSOLUTE = "abs"
    VALUE_RANGE_RELATIVE = "rel"


class PaddingValue(Enum):
    ZERO = "zero"
    MINIMUM = "min"
    MAXIMUM = "max"
    MEAN = "mean"


class PaddingGranularity(Enum):
    GLOBAL = "global"
    BLOCK = "block"
    EDGE = "edge"


@dataclass(frozen=True)
class ArrayDescriptor:
    """Dimensions and element type of an input grid (float32 only)."""

    ndims: int
    dims: tuple[int, ...]
    element_count: int = field(default=0)

    def __post_init__(self):
        if self.ndims not in (1, 2, 3):
            raise ConfigError(f"ndims must be 1, 2 or 3, got {self.ndims}")
        if len(self.dims) != self.ndims:
            raise ConfigError(
                f"{self.ndims}-dimensional descriptor with {len(self.dims)} extents"
            )
        if any(d < 1 for d in self.dims):
            raise ConfigError(f"every extent must be >= 1, got {self.dims}")
        object.__setattr__(self, "element_count", math.prod(self.dims))

    @classmethod
    def from_array(cls, data: np.ndarray) -> "ArrayDescriptor":
        if data.dtype != np.float32:
            raise ConfigError(f"only float32 data is supported, got {data.dtype}")
        return cls(ndims=data.ndim, dims=tuple(int(d) for d in data.shape))


@dataclass(frozen=True)
class ErrorBound:
    """User error bound, absolute or relative to the data value range."""

    mode: ErrorBoundMode
    value: float

    def __post_init__(self):
        if not (self.value > 0):
            raise ConfigError(f"error bound value must be > 0, got {self.value}")

    @classmethod
    def absolute(cls, value: float) -> "ErrorBound":
        return cls(ErrorBoundMode.ABSOLUTE, float(value))

    @classmethod
    def relative(cls, value: float) -> "ErrorBound":
        return cls(ErrorBoundMode.VALUE_RANGE_RELATIVE, float(value))


def resolve_error_bound(eb: ErrorBound, data: np.ndarray) -> float:
    """Resolve an error bound to an absolute bound for this data.

    Relative mode multiplies by the value range; constant data has no range,
    which would resolve to a zero bound, so it is rejected.
    """
    if data.size == 0:
        raise ConfigError("cannot resolve an error bound for empty data")
    if eb.mode is ErrorBoundMode.ABSOLUTE:
        return float(eb.value)
    lo = float(data.min())
    hi = float(data.max())
    if hi == lo:
        raise DegenerateRangeError(
            "value-range-relative bound on constant data resolves to zero"
        )
    return float(eb.value) * (hi - lo)


@dataclass(frozen=True)
class BlockGrid:
    """Decomposition of an array into fixed-edge blocks.

    Boundary blocks may be partial; their true extents are recovered with
    :meth:`block_extents`.  Block indices are row-major over
    ``blocks_per_dim``.
    """

    descriptor: ArrayDescriptor
    block_edge: int
    blocks_per_dim: tuple[int, ...]
    block_count: int

    def block_coords(self, block_index: int) -> tuple[int, ...]:
        coords = []
        rem = block_index
        for n in reversed(self.blocks_per_dim):
            coords.append(rem % n)
            rem //= n
        return tuple(reversed(coords))

    def block_extents(self, block_index: int) -> tuple[int, ...]:
        b = self.block_edge
        coords = self.block_coords(block_index)
        return tuple(
            min(b, dim - c * b) for c, dim in zip(coords, self.descriptor.dims)
        )

    def block_origin(self, block_index: int) -> tuple[int, ...]:
        b = self.block_edge
        return tuple(c * b for c in self.block_coords(block_index))


def build_block_grid(desc: ArrayDescriptor, block_edge: int) -> BlockGrid:
    """Tile ``desc`` with blocks of the given edge length."""
    if block_edge not in VALID_BLOCK_EDGES:
        raise ConfigError(
            f"block edge must be one of {VALID_BLOCK_EDGES}, got {block_edge}"
        )
    per_dim = tuple(-(-d // block_edge) for d in desc.dims)
    return BlockGrid(
        descriptor=desc,
        block_edge=block_edge,
        blocks_per_dim=per_dim,
        block_count=math.prod(per_dim),
    )


@dataclass(frozen=True)
class PaddingPolicy:
    """Which statistic supplies block-border halo values, and at what scope."""

    value_kind: PaddingValue = PaddingValue.MEAN
    granularity: PaddingGranularity = PaddingGranularity.GLOBAL

    def scalar_count(self, grid: BlockGrid) -> int:
        if self.value_kind is PaddingValue.ZERO:
            return 0
        if self.granularity is PaddingGranularity.GLOBAL:
            return 1
        if self.granularity is PaddingGranularity.BLOCK:
            return grid.block_count
        return grid.block_count * grid.descriptor.ndims

    @classmethod
    def parse(cls, text: str) -> "PaddingPolicy":
        """Parse ``kind`` or ``kind:granularity``, e.g. ``mean:global``."""
        parts = text.split(":")
        if len(parts) > 2:
            raise ConfigError(f"malformed padding policy {text!r}")
        try:
            kind = PaddingValue(parts[0])
        except ValueError:
            raise ConfigError(f"unknown padding value kind {parts[0]!r}") from None
        gran = PaddingGranularity.GLOBAL
        if len(parts) == 2:
            try:
                gran = PaddingGranularity(parts[1])
            except ValueError:
                raise ConfigError(f"unknown padding granularity {parts[1]!r}") from None
        return cls(kind, gran)

    def __str__(self) -> str:
        return f"{self.value_kind.value}:{self.granularity.value}"


@dataclass(frozen=True)
class CompressionConfig:
    """Everything the compressor needs besides the data itself."""

    error_bound: ErrorBound
    block_edge: int = 16
    lane_width: int = 8
    padding: PaddingPolicy = PaddingPolicy()
    radius: int = DEFAULT_RADIUS
    thread_count: int = 1

    def __post_init__(self):
        if self.block_edge not in VALID_BLOCK_EDGES:
            raise ConfigError(
                f"block edge must be one of {VALID_BLOCK_EDGES}, got {self.block_edge}"
            )
        if self.lane_width not in VALID_LANE_WIDTHS:
            raise ConfigError(
                f"lane width must be one of {VALID_LANE_WIDTHS}, got {self.lane_width}"
            )
        if not (2 <= self.radius <= DEFAULT_RADIUS):
            # codes must fit 16 bits for the container's codebook encoding
            raise ConfigError(
                f"quantizer radius must be within [2, {DEFAULT_RADIUS}], got {self.radius}"
            )
        if self.thread_count < 1:
            raise ConfigError(f"thread count must be >= 1, got {self.thread_count}")

    @property
    def effective_lanes(self) -> int:
        # A lane never spans more than one block row.
        return min(self.lane_width, self.block_edge)


@dataclass(frozen=True)
class QuantizedGrid:
    """Pre-quantized integer field: values[i] = round(data[i] / (2 eb))."""

    values: np.ndarray  # int64, same shape as the source array
    descriptor: ArrayDescriptor
    resolved_abs: float


@dataclass(frozen=True)
class CodeStream:
    """Quantization codes plus outliers, in canonical block order.

    ``codes`` holds one entry per element: 0 is the outlier sentinel, any
    other value c encodes a prediction delta c - radius.  ``outlier_values``
    holds the verbatim float32 of every sentinel element, in the same
    traversal order; ``outlier_counts`` partitions that list per block so
    blocks can be decoded independently.
    """

    codes: np.ndarray  # uint32, length element_count
    outlier_values: np.ndarray  # float32, length = number of sentinels
    outlier_counts: np.ndarray  # int64, length block_count
    grid: BlockGrid
    resolved_abs: float
    radius: int
    scalars: "PaddingScalars"

    def same_bytes(self, other: "CodeStream") -> bool:
        """Exact stream equality: codes, outliers, partitioning, halo scalars."""
        return (
            self.codes.tobytes() == other.codes.tobytes()
            and self.outlier_values.tobytes() == other.outlier_values.tobytes()
            and self.outlier_counts.tobytes() == other.outlier_counts.tobytes()
            and self.scalars.values.tobytes() == other.scalars.values.tobytes()
        )
