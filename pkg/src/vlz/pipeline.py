"""End-to-end compress/decompress entry points."""

from __future__ import annotations

import numpy as np

from .container import serialize
from .kernel import dualquant_scalar
from .model import CompressionConfig
from .reconstruct import decompress  # re-exported
from .vector import dualquant_vector

__all__ = ["compress", "decompress"]


def compress(data: np.ndarray, config: CompressionConfig) -> bytes:
    """Compress a float32 array into container bytes.

    Lane width 1 selects the scalar reference kernel (slow, element at a
    time); any other lane width runs the vector kernel.  Both produce the
    same bytes.
    """
    return compress_detailed(data, config)[0]


def compress_detailed(data: np.ndarray, config: CompressionConfig):
    """Like :func:`compress` but also returns the intermediate code stream."""
    if config.lane_width == 1:
        stream = dualquant_scalar(data, config)
    else:
        stream = dualquant_vector(data, config)
    return serialize(stream, config), stream
