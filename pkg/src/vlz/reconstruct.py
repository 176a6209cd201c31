"""Decompression: invert post- and pre-quantization block by block.

Inside a block the traversal is strictly sequential, because every Lorenzo
prediction needs the already-reconstructed preceding neighbors.  Blocks are
independent of each other (the halo comes from stored padding scalars, never
from neighboring blocks), so blocks decode in parallel and the outlier side
list is partitioned per block to avoid any shared cursor.

A sentinel code restores the verbatim float32 that was stored for it; its
integer grid value, needed by later predictions in the block, is recovered
by re-quantizing the verbatim value with the same float64 arithmetic the
compressor used.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .container import ParsedContainer, deserialize
from .errors import CorruptStreamError
from .huffman import decode
from .kernel import PaddedBlock, lorenzo_predict
from .model import ArrayDescriptor, build_block_grid
from .padding import apply_padding
from .quantize import quantize_value


def reconstruct_block(
    codes: np.ndarray,
    outliers: np.ndarray,
    halo: tuple[int, ...],
    extents: tuple[int, ...],
    eb: float,
    radius: int,
) -> np.ndarray:
    """Reconstruct one block from its codes and verbatim outliers.

    ``codes`` is the block's flat slice of the canonical stream, ``outliers``
    exactly its own sentinel values, in traversal order.
    """
    n = int(np.prod(extents))
    if codes.size != n:
        raise CorruptStreamError(f"expected {n} codes for the block, got {codes.size}")
    if codes.size and int(codes.max()) >= 2 * radius:
        raise CorruptStreamError(
            f"code {int(codes.max())} out of range for radius {radius}"
        )
    dq = np.zeros(extents, dtype=np.int64)
    block = PaddedBlock(extents, halo, dq)
    sentinels: list[tuple[int, ...]] = []
    cursor = 0
    for flat_i, index in enumerate(np.ndindex(*extents)):
        c = int(codes[flat_i])
        if c == 0:
            if cursor >= len(outliers):
                raise CorruptStreamError("outlier list exhausted before sentinels")
            dq[index] = quantize_value(float(outliers[cursor]), eb)
            sentinels.append(index)
            cursor += 1
        else:
            dq[index] = lorenzo_predict(block, index) + (c - radius)
    if cursor != len(outliers):
        raise CorruptStreamError(
            f"block consumed {cursor} outliers but {len(outliers)} were stored"
        )
    out = ((2.0 * dq.astype(np.float64)) * eb).astype(np.float32)
    for k, index in enumerate(sentinels):
        out[index] = outliers[k]
    return out


def decompress_parsed(
    parsed: ParsedContainer, thread_count: int = 1
) -> tuple[np.ndarray, ArrayDescriptor]:
    """Reassemble the full array from validated container parts."""
    desc = parsed.descriptor
    grid = build_block_grid(desc, parsed.block_edge)
    eb = parsed.resolved_abs
    radius = parsed.radius
    scalars = parsed.scalars

    codes = decode(
        parsed.code_bits, parsed.code_bit_length, parsed.codebook, desc.element_count
    )
    n_sentinel = int(np.count_nonzero(codes == 0))
    if n_sentinel != len(parsed.outlier_values):
        raise CorruptStreamError(
            f"{n_sentinel} sentinel codes but {len(parsed.outlier_values)} outliers"
        )

    sizes = np.array(
        [int(np.prod(grid.block_extents(b))) for b in range(grid.block_count)],
        dtype=np.int64,
    )
    code_starts = np.concatenate([[0], np.cumsum(sizes)])
    out_starts = np.concatenate([[0], np.cumsum(parsed.outlier_counts)])
    if int(code_starts[-1]) != desc.element_count:
        raise CorruptStreamError("block extents do not cover the array")

    out = np.empty(desc.dims, dtype=np.float32)

    def run(bi: int):
        extents = grid.block_extents(bi)
        origin = grid.block_origin(bi)
        blk = reconstruct_block(
            codes[code_starts[bi] : code_starts[bi + 1]],
            parsed.outlier_values[out_starts[bi] : out_starts[bi + 1]],
            apply_padding(scalars, grid, bi),
            extents,
            eb,
            radius,
        )
        sel = tuple(slice(o, o + e) for o, e in zip(origin, extents))
        out[sel] = blk

    if thread_count > 1 and grid.block_count > 1:
        with ThreadPoolExecutor(max_workers=thread_count) as pool:
            list(pool.map(run, range(grid.block_count)))
    else:
        for bi in range(grid.block_count):
            run(bi)
    return out, desc


def decompress(blob: bytes, thread_count: int = 1) -> tuple[np.ndarray, ArrayDescriptor]:
    """Decompress container bytes into a float32 array and its descriptor."""
    return decompress_parsed(deserialize(blob), thread_count=thread_count)
