"""Self-describing compressed container: header, sections, CRCs.

Byte layout (all integers little-endian, fixed width):

  header (112 bytes)
    magic            4s   b"VLZ1"
    version          u16  1
    flags            u16  reserved (future lossless post-pass)
    ndims            u8
    eb_mode          u8   0 = absolute, 1 = value-range relative
    pad_kind         u8   0 zero / 1 min / 2 max / 3 mean
    pad_gran         u8   0 global / 1 block / 2 edge
    dims             3*u64  unused trailing dims are 1
    eb_value         f64
    resolved_eb      f64
    block_edge       u16
    lane_width       u16
    radius           u32
    element_count    u64
    off_padding      u64  -+
    off_codebook     u64   | absolute byte offsets of each section
    off_codes        u64   |
    off_outliers     u64  -+
    total_bytes      u64  container length, for truncation detection
    header_crc       u32  CRC32 of the header with this field zeroed

  padding section:   count u64, then count * i64 pre-quantized scalars
  codebook section:  nsym u32, then nsym * (symbol u16, length u8),
                     sorted by (length, symbol); symbols fit 16 bits
                     because the radius is capped at 32768
  codes section:     bit_length u64, then ceil(bit_length/8) bytes,
                     MSB-first within each byte
  outlier section:   total u64, nonzero_blocks u64,
                     then nonzero_blocks * (block_index u32, count u32),
                     then total * f32 verbatim values
  payload_crc        u32  CRC32 of everything between header and this field

Deserialization validates magic, version, header CRC, offsets, and payload
CRC, in that order, before touching any payload.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass

import numpy as np

from .errors import (
    BadMagicError,
    ConfigError,
    HeaderCrcError,
    PayloadCrcError,
    SectionOffsetError,
    UnsupportedVersionError,
)
from .huffman import HuffmanCodebook, build_codebook, encode
from .model import (
    ArrayDescriptor,
    CodeStream,
    CompressionConfig,
    ErrorBound,
    ErrorBoundMode,
    PaddingGranularity,
    PaddingPolicy,
    PaddingValue,
)
from .padding import PaddingScalars

MAGIC = b"VLZ1"
VERSION = 1
_HEADER = struct.Struct("<4sHHBBBB3QddHHIQ5QI")

_EB_MODES = (ErrorBoundMode.ABSOLUTE, ErrorBoundMode.VALUE_RANGE_RELATIVE)
_PAD_KINDS = (PaddingValue.ZERO, PaddingValue.MINIMUM, PaddingValue.MAXIMUM, PaddingValue.MEAN)
_PAD_GRANS = (PaddingGranularity.GLOBAL, PaddingGranularity.BLOCK, PaddingGranularity.EDGE)


@dataclass(frozen=True)
class ParsedContainer:
    """Validated container parts, codes still Huffman-packed."""

    descriptor: ArrayDescriptor
    error_bound: ErrorBound
    resolved_abs: float
    block_edge: int
    lane_width: int
    radius: int
    padding_policy: PaddingPolicy
    padding_values: np.ndarray  # int64
    codebook: HuffmanCodebook
    code_bits: bytes
    code_bit_length: int
    outlier_values: np.ndarray  # float32
    outlier_counts: np.ndarray  # int64, per block, dense
    total_bytes: int

    @property
    def scalars(self) -> PaddingScalars:
        return PaddingScalars(self.padding_policy, self.padding_values)


def serialize(stream: CodeStream, config: CompressionConfig) -> bytes:
    """Serialize a code stream (and the config that produced it) to bytes."""
    desc = stream.grid.descriptor
    dims3 = tuple(desc.dims) + (1,) * (3 - desc.ndims)

    codebook = build_codebook(stream.codes)
    bits, nbits = encode(stream.codes, codebook)

    pad = stream.scalars.values.astype("<i8").tobytes()
    padding_sec = struct.pack("<Q", len(stream.scalars.values)) + pad

    cb_parts = [struct.pack("<I", len(codebook.symbols))]
    for s, l in zip(codebook.symbols, codebook.lengths):
        cb_parts.append(struct.pack("<HB", int(s), int(l)))
    codebook_sec = b"".join(cb_parts)

    codes_sec = struct.pack("<Q", nbits) + bits

    if stream.grid.block_count > 0xFFFFFFFF:
        raise ConfigError("block count exceeds the container's 32-bit index")
    nz = np.flatnonzero(stream.outlier_counts)
    out_parts = [struct.pack("<QQ", int(stream.outlier_counts.sum()), len(nz))]
    for b in nz:
        out_parts.append(struct.pack("<II", int(b), int(stream.outlier_counts[b])))
    out_parts.append(stream.outlier_values.astype("<f4").tobytes())
    outlier_sec = b"".join(out_parts)

    off_padding = _HEADER.size
    off_codebook = off_padding + len(padding_sec)
    off_codes = off_codebook + len(codebook_sec)
    off_outliers = off_codes + len(codes_sec)
    total = off_outliers + len(outlier_sec) + 4  # + payload CRC

    def pack_header(crc: int) -> bytes:
        return _HEADER.pack(
            MAGIC,
            VERSION,
            0,
            desc.ndims,
            _EB_MODES.index(config.error_bound.mode),
            _PAD_KINDS.index(config.padding.value_kind),
            _PAD_GRANS.index(config.padding.granularity),
            *dims3,
            config.error_bound.value,
            stream.resolved_abs,
            config.block_edge,
            config.lane_width,
            stream.radius,
            desc.element_count,
            off_padding,
            off_codebook,
            off_codes,
            off_outliers,
            total,
            crc,
        )

    header = pack_header(zlib.crc32(pack_header(0)))
    payload = padding_sec + codebook_sec + codes_sec + outlier_sec
    return header + payload + struct.pack("<I", zlib.crc32(payload))


def deserialize(blob: bytes) -> ParsedContainer:
    """Validate and parse container bytes (magic, version, CRCs, offsets)."""
    if len(blob) < _HEADER.size + 4:
        raise SectionOffsetError(
            f"container truncated: {len(blob)} bytes, header alone is {_HEADER.size}"
        )
    fields = _HEADER.unpack_from(blob, 0)
    (
        magic,
        version,
        _flags,
        ndims,
        eb_mode,
        pad_kind,
        pad_gran,
        d0,
        d1,
        d2,
        eb_value,
        resolved_eb,
        block_edge,
        lane_width,
        radius,
        element_count,
        off_padding,
        off_codebook,
        off_codes,
        off_outliers,
        total,
        header_crc,
    ) = fields
    if magic != MAGIC:
        raise BadMagicError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise UnsupportedVersionError(f"container version {version} not supported")
    expect = zlib.crc32(
        _HEADER.pack(*fields[:-1], 0)
    )
    if header_crc != expect:
        raise HeaderCrcError("header CRC mismatch")
    if total != len(blob):
        raise SectionOffsetError(
            f"container declares {total} bytes but {len(blob)} are present"
        )
    offs = (off_padding, off_codebook, off_codes, off_outliers)
    if list(offs) != sorted(offs) or offs[0] != _HEADER.size or offs[-1] > total - 4:
        raise SectionOffsetError(f"inconsistent section offsets {offs}")

    payload = blob[_HEADER.size : total - 4]
    (payload_crc,) = struct.unpack_from("<I", blob, total - 4)
    if zlib.crc32(payload) != payload_crc:
        raise PayloadCrcError("payload CRC mismatch")

    def need(pos: int, n: int, what: str) -> int:
        if pos + n > total - 4:
            raise SectionOffsetError(f"{what} section runs past the container end")
        return pos + n

    pos = off_padding
    need(pos, 8, "padding")
    (pad_count,) = struct.unpack_from("<Q", blob, pos)
    pos = need(pos + 8, pad_count * 8, "padding")
    padding_values = np.frombuffer(
        blob, dtype="<i8", count=pad_count, offset=pos - pad_count * 8
    ).astype(np.int64)

    pos = off_codebook
    need(pos, 4, "codebook")
    (nsym,) = struct.unpack_from("<I", blob, pos)
    pos = need(pos + 4, nsym * 3, "codebook")
    syms = np.empty(nsym, dtype=np.uint32)
    lens = np.empty(nsym, dtype=np.uint8)
    for i in range(nsym):
        s, l = struct.unpack_from("<HB", blob, off_codebook + 4 + 3 * i)
        syms[i] = s
        lens[i] = l
    if nsym and (syms.max() >= 2 * radius or (lens == 0).any()):
        raise SectionOffsetError("codebook symbols inconsistent with the radius")
    codebook = HuffmanCodebook.from_lengths(syms, lens)

    pos = off_codes
    need(pos, 8, "codes")
    (nbits,) = struct.unpack_from("<Q", blob, pos)
    nbytes = (nbits + 7) // 8
    pos = need(pos + 8, nbytes, "codes")
    code_bits = blob[pos - nbytes : pos]

    pos = off_outliers
    need(pos, 16, "outliers")
    n_out, nz_blocks = struct.unpack_from("<QQ", blob, pos)
    pos = need(pos + 16, nz_blocks * 8, "outliers")
    if eb_mode >= len(_EB_MODES) or pad_kind >= len(_PAD_KINDS) or pad_gran >= len(_PAD_GRANS):
        raise SectionOffsetError("unknown error-bound mode or padding policy code")

    from .model import build_block_grid

    try:
        desc = ArrayDescriptor(ndims=ndims, dims=(d0, d1, d2)[:ndims])
        grid = build_block_grid(desc, block_edge)
    except ConfigError as exc:
        raise SectionOffsetError(f"invalid geometry in header: {exc}") from exc
    if desc.element_count != element_count:
        raise SectionOffsetError("element count disagrees with the dimensions")
    counts = np.zeros(grid.block_count, dtype=np.int64)
    base = off_outliers + 16
    for i in range(nz_blocks):
        b, c = struct.unpack_from("<II", blob, base + 8 * i)
        if b >= grid.block_count:
            raise SectionOffsetError(f"outlier block index {b} out of range")
        counts[b] = c
    if int(counts.sum()) != n_out:
        raise SectionOffsetError("outlier counts do not add up to the declared total")
    pos = need(pos, n_out * 4, "outliers")
    outlier_values = np.frombuffer(
        blob, dtype="<f4", count=n_out, offset=pos - n_out * 4
    ).astype(np.float32)

    return ParsedContainer(
        descriptor=desc,
        error_bound=ErrorBound(_EB_MODES[eb_mode], eb_value),
        resolved_abs=resolved_eb,
        block_edge=block_edge,
        lane_width=lane_width,
        radius=radius,
        padding_policy=PaddingPolicy(_PAD_KINDS[pad_kind], _PAD_GRANS[pad_gran]),
        padding_values=padding_values,
        codebook=codebook,
        code_bits=code_bits,
        code_bit_length=nbits,
        outlier_values=outlier_values,
        outlier_counts=counts,
        total_bytes=total,
    )
