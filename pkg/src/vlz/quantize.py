"""Pre-quantization: map floats onto the integer grid d = round(v / (2 eb)).

All intermediates are float64; rounding is half-away-from-zero.  The scalar
and vectorized forms below evaluate the exact same float64 expressions so
that every caller (reference kernel, lane kernel, decompressor) lands on
identical integers.

Reconstruction of a grid point is (2 * d) * eb, evaluated in float64 and
narrowed to float32.  Narrowing to float32 can push a reconstruction past
the error bound even though the float64 value is in bounds, so the
compressor re-checks every element against its narrowed reconstruction and
demotes violators to verbatim outliers.  One useful fact, relied on for
byte-stable recompression: the narrowed reconstruction never re-quantizes
to a different integer, because the float32 rounding error cannot exceed
the distance to the original float32 datum, which is at most eb.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import BoundTooSmallError, ConfigError
from .model import ArrayDescriptor, QuantizedGrid

# Quantized magnitudes must stay below this to fit the 32-bit code pipeline.
_OVERFLOW_LIMIT = float(2**31 - 1)


def round_half_away(q: float) -> int:
    """Round to nearest integer, ties away from zero."""
    if q > 0.0:
        return math.floor(q + 0.5)
    if q < 0.0:
        return -math.floor(-q + 0.5)
    return 0


def quantize_value(v: float, eb: float) -> int:
    """Scalar pre-quantization of one value (float64 arithmetic)."""
    return round_half_away(v / (2.0 * eb))


def reconstruct_value(dq: int, eb: float) -> np.float32:
    """Scalar reconstruction of one grid point, narrowed to float32."""
    return np.float32((2.0 * dq) * eb)


def prequantize(data: np.ndarray, eb: float) -> QuantizedGrid:
    """Pre-quantize a whole float32 array onto the 2*eb integer grid.

    Raises :class:`BoundTooSmallError` naming the first offending flat index
    if any |v| / (2 eb) would overflow the quantizer, and
    :class:`ConfigError` for non-finite input.
    """
    desc = ArrayDescriptor.from_array(data)
    if eb <= 0.0:
        raise ConfigError(f"resolved error bound must be > 0, got {eb}")
    finite = np.isfinite(data)
    if not finite.all():
        idx = int(np.argmin(finite.ravel()))
        raise ConfigError(f"data contains a non-finite value at flat index {idx}")
    # In-place float64 chain to keep peak memory near 3x the input: the
    # values are identical to floor(abs(d / (2 eb)) + 0.5) * sign(...).
    q = data.astype(np.float64)
    np.divide(q, 2.0 * eb, out=q)
    mag = np.abs(q)
    over = mag >= _OVERFLOW_LIMIT
    if over.any():
        idx = int(np.argmax(over.ravel()))
        raise BoundTooSmallError(idx, float(data.ravel()[idx]), eb)
    del over
    np.add(mag, 0.5, out=mag)
    np.floor(mag, out=mag)
    np.sign(q, out=q)
    np.multiply(mag, q, out=mag)
    dq = mag.astype(np.int64)
    return QuantizedGrid(values=dq, descriptor=desc, resolved_abs=eb)


def reconstruct_array(dq: np.ndarray, eb: float) -> np.ndarray:
    """Vectorized reconstruction of grid points, narrowed to float32."""
    return ((2.0 * dq.astype(np.float64)) * eb).astype(np.float32)
