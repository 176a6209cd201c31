"""Lane-parameterized vector kernel: staged block tiles, whole-lane math.

Blocks are staged into edge-padded scratch tiles (one extra plane on every
low-index face holding the halo scalars) and processed with array
arithmetic.  Bounds checks are hoisted to lane granularity: a full lane of
work is always computed, including lanes that hang past the array edge into
zero-filled scratch, and out-of-bounds results are discarded when codes are
emitted.  The last-axis processing width is ``effective_lanes``
(= min(lane_width, block_edge)), so narrower lanes mean more, narrower
passes over each tile row.

Work items are contiguous runs of blocks in canonical order; items are
processed independently (optionally by a thread pool) and their outputs
concatenated, so the stream is byte-identical for any thread count and
byte-identical to the scalar reference kernel.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .errors import ConfigError
from .model import (
    ArrayDescriptor,
    BlockGrid,
    CodeStream,
    CompressionConfig,
    VECTOR_LANE_WIDTHS,
    build_block_grid,
    resolve_error_bound,
)
from .padding import PaddingScalars, compute_padding, scalars_for_blocks
from .quantize import prequantize

# Upper bound on staged elements per work item (int64 tile ~16 MB).
_ITEM_ELEMENTS = 1 << 21


def _segment_pass(Tq, Tf, nd, block_edge, eff, radius, eb, codes_out, outl_out):
    """Predict + post-quantize one staged tile batch, one lane run at a time.

    ``Tq`` is int64 with shape batch + (block_edge+1,)*nd (halo included),
    ``Tf`` float32 with shape batch + (block_edge,)*nd (interior only).
    Results land in ``codes_out``/``outl_out`` shaped like ``Tf``.
    """
    keep_max = radius - 1
    for s in range(0, block_edge, eff):
        e = s + eff
        if nd == 1:
            D = Tq[..., 1 + s : 1 + e]
            pred = Tq[..., s:e]
        elif nd == 2:
            D = Tq[..., 1:, 1 + s : 1 + e]
            pred = (
                Tq[..., 1:, s:e]
                + Tq[..., :-1, 1 + s : 1 + e]
                - Tq[..., :-1, s:e]
            )
        else:
            D = Tq[..., 1:, 1:, 1 + s : 1 + e]
            pred = (
                Tq[..., 1:, 1:, s:e]
                + Tq[..., 1:, :-1, 1 + s : 1 + e]
                + Tq[..., :-1, 1:, 1 + s : 1 + e]
                - Tq[..., 1:, :-1, s:e]
                - Tq[..., :-1, 1:, s:e]
                - Tq[..., :-1, :-1, 1 + s : 1 + e]
                + Tq[..., :-1, :-1, s:e]
            )
        delta = D - pred
        w = ((2.0 * D.astype(np.float64)) * eb).astype(np.float32)
        off_bound = (
            np.abs(w.astype(np.float64) - Tf[..., s:e].astype(np.float64)) > eb
        )
        outl = (np.abs(delta) > keep_max) | off_bound
        codes_out[..., s:e] = np.where(outl, 0, delta + radius).astype(np.uint32)
        outl_out[..., s:e] = outl


def _border_mask(nd: int, block_edge: int) -> np.ndarray:
    """In-block mask of elements whose prediction reads at least one halo."""
    m = np.zeros((block_edge,) * nd, dtype=bool)
    for d in range(nd):
        m[tuple(slice(None) if a != d else 0 for a in range(nd))] = True
    return m


def _partition(grid: BlockGrid) -> list[tuple[int, ...]]:
    """Split the block grid into canonical-order work items of bounded size."""
    b = grid.block_edge
    nd = grid.descriptor.ndims
    per = grid.blocks_per_dim
    if nd == 1:
        step = max(1, _ITEM_ELEMENTS // b)
        return [(k, min(k + step, per[0])) for k in range(0, per[0], step)]
    if nd == 2:
        row_elems = b * per[1] * b
        step = max(1, _ITEM_ELEMENTS // row_elems)
        return [(k, min(k + step, per[0])) for k in range(0, per[0], step)]
    row_elems = b * b * per[2] * b
    step = max(1, _ITEM_ELEMENTS // row_elems)
    items = []
    for k0 in range(per[0]):
        for k1 in range(0, per[1], step):
            items.append((k0, k1, min(k1 + step, per[1])))
    return items


def _process_item(
    item,
    data: np.ndarray,
    dq: np.ndarray,
    grid: BlockGrid,
    scalars: PaddingScalars,
    eff: int,
    radius: int,
    eb: float,
    border: np.ndarray | None,
):
    b = grid.block_edge
    nd = grid.descriptor.ndims
    dims = grid.descriptor.dims
    per = grid.blocks_per_dim

    if nd == 1:
        klo, khi = item
        nbc = khi - klo
        bi = np.arange(klo, khi)
        Tq = np.empty((nbc, b + 1), dtype=np.int64)
        Tq[:, 0] = scalars_for_blocks(scalars, grid, bi, 0)
        lo, hi = klo * b, min(khi * b, dims[0])
        zq = np.zeros(nbc * b, dtype=np.int64)
        zq[: hi - lo] = dq[lo:hi]
        Tq[:, 1:] = zq.reshape(nbc, b)
        Tf = np.zeros(nbc * b, dtype=np.float32)
        Tf[: hi - lo] = data[lo:hi]
        Tf = Tf.reshape(nbc, b)
        inb = np.arange(lo, lo + nbc * b).reshape(nbc, b) < dims[0]
        sum_axes = (1,)
    elif nd == 2:
        k0lo, k0hi = item
        nb0c = k0hi - k0lo
        nb1 = per[1]
        bi = np.arange(k0lo, k0hi)[:, None] * nb1 + np.arange(nb1)[None, :]
        Tq = np.empty((nb0c, nb1, b + 1, b + 1), dtype=np.int64)
        Tq[:, :, 0, :] = scalars_for_blocks(scalars, grid, bi, 0)[:, :, None]
        Tq[:, :, :, 0] = scalars_for_blocks(scalars, grid, bi, 1)[:, :, None]
        r0, r1 = k0lo * b, min(k0hi * b, dims[0])
        zq = np.zeros((nb0c * b, nb1 * b), dtype=np.int64)
        zq[: r1 - r0, : dims[1]] = dq[r0:r1, :]
        Tq[:, :, 1:, 1:] = zq.reshape(nb0c, b, nb1, b).transpose(0, 2, 1, 3)
        zf = np.zeros((nb0c * b, nb1 * b), dtype=np.float32)
        zf[: r1 - r0, : dims[1]] = data[r0:r1, :]
        Tf = zf.reshape(nb0c, b, nb1, b).transpose(0, 2, 1, 3).copy()
        m0 = (r0 + np.arange(nb0c * b)).reshape(nb0c, b) < dims[0]
        m1 = np.arange(nb1 * b).reshape(nb1, b) < dims[1]
        inb = m0[:, None, :, None] & m1[None, :, None, :]
        sum_axes = (2, 3)
    else:
        k0, k1lo, k1hi = item
        nb1c = k1hi - k1lo
        nb2 = per[2]
        bi = (
            k0 * per[1] * nb2
            + np.arange(k1lo, k1hi)[:, None] * nb2
            + np.arange(nb2)[None, :]
        )
        Tq = np.empty((nb1c, nb2, b + 1, b + 1, b + 1), dtype=np.int64)
        Tq[:, :, 0, :, :] = scalars_for_blocks(scalars, grid, bi, 0)[:, :, None, None]
        Tq[:, :, :, 0, :] = scalars_for_blocks(scalars, grid, bi, 1)[:, :, None, None]
        Tq[:, :, :, :, 0] = scalars_for_blocks(scalars, grid, bi, 2)[:, :, None, None]
        r0 = k0 * b
        e0 = min(b, dims[0] - r0)
        q0, q1 = k1lo * b, min(k1hi * b, dims[1])
        zq = np.zeros((b, nb1c * b, nb2 * b), dtype=np.int64)
        zq[:e0, : q1 - q0, : dims[2]] = dq[r0 : r0 + e0, q0:q1, :]
        Tq[:, :, 1:, 1:, 1:] = zq.reshape(b, nb1c, b, nb2, b).transpose(1, 3, 0, 2, 4)
        zf = np.zeros((b, nb1c * b, nb2 * b), dtype=np.float32)
        zf[:e0, : q1 - q0, : dims[2]] = data[r0 : r0 + e0, q0:q1, :]
        Tf = zf.reshape(b, nb1c, b, nb2, b).transpose(1, 3, 0, 2, 4).copy()
        m0 = np.arange(b) < e0
        m1 = (q0 + np.arange(nb1c * b)).reshape(nb1c, b) < dims[1]
        m2 = np.arange(nb2 * b).reshape(nb2, b) < dims[2]
        inb = (
            m0[None, None, :, None, None]
            & m1[:, None, None, :, None]
            & m2[None, :, None, None, :]
        )
        sum_axes = (2, 3, 4)

    codes = np.empty(Tf.shape, dtype=np.uint32)
    outl = np.empty(Tf.shape, dtype=bool)
    _segment_pass(Tq, Tf, nd, b, eff, radius, eb, codes, outl)

    emit = outl & inb
    counts = emit.sum(axis=sum_axes, dtype=np.int64).reshape(-1)
    codes_flat = codes[inb]
    ovals = Tf[emit]
    border_hits = int((emit & border).sum()) if border is not None else 0
    return codes_flat, ovals, counts, border_hits


def dualquant_vector(
    data: np.ndarray,
    config: CompressionConfig,
    collect_border: bool = False,
):
    """Run the full dual-quantization pipeline with the lane kernel.

    Returns a :class:`CodeStream`; with ``collect_border=True`` returns
    ``(stream, (total_outliers, border_outliers))`` instead.
    """
    if config.lane_width not in VECTOR_LANE_WIDTHS:
        raise ConfigError(
            f"vector kernel needs a lane width in {VECTOR_LANE_WIDTHS}, "
            f"got {config.lane_width} (lane width 1 is the scalar kernel)"
        )
    desc = ArrayDescriptor.from_array(data)
    eb = resolve_error_bound(config.error_bound, data)
    grid = build_block_grid(desc, config.block_edge)
    qgrid = prequantize(data, eb)
    scalars = compute_padding(data, grid, config.padding, eb, prequantized=qgrid)

    eff = config.effective_lanes
    border = _border_mask(desc.ndims, grid.block_edge) if collect_border else None
    items = _partition(grid)

    def run(item):
        return _process_item(
            item, data, qgrid.values, grid, scalars, eff, config.radius, eb, border
        )

    if config.thread_count > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=config.thread_count) as pool:
            results = list(pool.map(run, items))
    else:
        results = [run(item) for item in items]

    codes = np.concatenate([r[0] for r in results])
    ovals = (
        np.concatenate([r[1] for r in results])
        if results
        else np.zeros(0, dtype=np.float32)
    )
    counts = np.concatenate([r[2] for r in results])
    stream = CodeStream(
        codes=codes,
        outlier_values=ovals,
        outlier_counts=counts,
        grid=grid,
        resolved_abs=eb,
        radius=config.radius,
        scalars=scalars,
    )
    if collect_border:
        total = int(counts.sum())
        return stream, (total, sum(r[3] for r in results))
    return stream
