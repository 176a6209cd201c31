"""Canonical Huffman coding of the quantization-code stream.

Code lengths come from a standard Huffman merge; frequency ties are broken
by the smallest symbol in each subtree so the table is deterministic.
Codewords are then reassigned canonically (sorted by length, then symbol),
which is what lets the container store only (symbol, length) pairs.

Packing is MSB-first within bytes.  A stream with a single distinct symbol
gets a 1-bit code (a zero-bit code would make the bit count degenerate).
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, CorruptStreamError

# Root lookup table width for the decoder fast path.
_LUT_BITS = 12


@dataclass(frozen=True)
class HuffmanCodebook:
    """Canonical codebook: symbols present in the stream and their lengths."""

    symbols: np.ndarray  # uint32, sorted by (length, symbol)
    lengths: np.ndarray  # uint8, same order
    codewords: np.ndarray  # uint64, canonical codes, same order

    @classmethod
    def from_lengths(cls, symbols: np.ndarray, lengths: np.ndarray) -> "HuffmanCodebook":
        order = np.lexsort((symbols, lengths))
        symbols = symbols[order].astype(np.uint32)
        lengths = lengths[order].astype(np.uint8)
        codewords = np.zeros(len(symbols), dtype=np.uint64)
        code = 0
        for i in range(len(symbols)):
            codewords[i] = code
            code += 1
            if i + 1 < len(symbols):
                code <<= int(lengths[i + 1]) - int(lengths[i])
        return cls(symbols, lengths, codewords)

    def kraft_sum(self) -> float:
        return float(np.sum(2.0 ** (-self.lengths.astype(np.float64))))

    def total_bits(self, frequencies: dict[int, int]) -> int:
        return sum(
            frequencies[int(s)] * int(l) for s, l in zip(self.symbols, self.lengths)
        )


def build_codebook(codes: np.ndarray) -> HuffmanCodebook:
    """Optimal prefix-code lengths for the symbols of ``codes``."""
    if codes.size == 0:
        raise ConfigError("cannot build a codebook for an empty code stream")
    freqs = np.bincount(codes.ravel())
    present = np.flatnonzero(freqs)
    if len(present) == 1:
        return HuffmanCodebook.from_lengths(
            present.astype(np.uint32), np.array([1], dtype=np.uint8)
        )

    # Heap entries: (frequency, smallest symbol in subtree, node id).
    # children[nid] = (left, right) for internal nodes, None for leaves.
    heap = [(int(freqs[s]), int(s), i) for i, s in enumerate(present)]
    children: list[tuple[int, int] | None] = [None] * len(present)
    heapq.heapify(heap)
    while len(heap) > 1:
        f1, m1, n1 = heapq.heappop(heap)
        f2, m2, n2 = heapq.heappop(heap)
        children.append((n1, n2))
        heapq.heappush(heap, (f1 + f2, min(m1, m2), len(children) - 1))

    depths = np.zeros(len(present), dtype=np.uint8)
    stack = [(heap[0][2], 0)]
    while stack:
        nid, depth = stack.pop()
        kids = children[nid]
        if kids is None:
            depths[nid] = depth
        else:
            stack.append((kids[0], depth + 1))
            stack.append((kids[1], depth + 1))
    return HuffmanCodebook.from_lengths(present.astype(np.uint32), depths)


def encode(codes: np.ndarray, codebook: HuffmanCodebook) -> tuple[bytes, int]:
    """Pack a symbol stream into bits; returns (payload, bit_length)."""
    flat = codes.ravel()
    if flat.size == 0:
        return b"", 0
    n_sym = int(codebook.symbols.max()) + 1
    len_of = np.zeros(n_sym, dtype=np.uint8)
    code_of = np.zeros(n_sym, dtype=np.uint64)
    len_of[codebook.symbols] = codebook.lengths
    code_of[codebook.symbols] = codebook.codewords

    if flat.max() >= n_sym or (len_of[flat] == 0).any():
        missing = flat[flat >= n_sym] if flat.max() >= n_sym else flat[len_of[flat] == 0]
        raise CorruptStreamError(f"symbol {int(missing[0])} not in the codebook")

    chunks = []
    total_bits = 0
    maxlen = int(codebook.lengths.max())
    col = np.arange(maxlen, dtype=np.int64)
    for lo in range(0, flat.size, 1 << 18):
        part = flat[lo : lo + (1 << 18)]
        L = len_of[part].astype(np.int64)
        C = code_of[part]
        # bit j (MSB first) of each codeword = C >> (L - 1 - j); columns
        # beyond a codeword's length are masked out before flattening
        shift = L[:, None] - 1 - col[None, :]
        valid = shift >= 0
        mat = ((C[:, None] >> np.maximum(shift, 0).astype(np.uint64)) & np.uint64(1)).astype(np.uint8)
        chunks.append(mat[valid])
        total_bits += int(L.sum())
    bits = np.concatenate(chunks)
    return np.packbits(bits).tobytes(), total_bits


def decode(payload: bytes, bit_length: int, codebook: HuffmanCodebook, count: int) -> np.ndarray:
    """Decode exactly ``count`` symbols, consuming exactly ``bit_length`` bits."""
    if count == 0:
        if bit_length != 0:
            raise CorruptStreamError("nonzero bit length for an empty stream")
        return np.zeros(0, dtype=np.uint32)
    if len(payload) * 8 < bit_length:
        raise CorruptStreamError("bit payload shorter than its declared length")

    lengths = codebook.lengths
    maxlen = int(lengths.max())
    # first_code[l], first_idx[l], count_l[l] per present length (canonical decode)
    first_code = [0] * (maxlen + 2)
    first_idx = [0] * (maxlen + 2)
    count_l = [0] * (maxlen + 2)
    for l in lengths:
        count_l[int(l)] += 1
    code = 0
    idx = 0
    for l in range(1, maxlen + 1):
        first_code[l] = code
        first_idx[l] = idx
        code = (code + count_l[l]) << 1
        idx += count_l[l]
    symtab = codebook.symbols

    # Fast path: every codeword of length <= _LUT_BITS, via a prefix table.
    lut_bits = min(_LUT_BITS, maxlen)
    lut_sym = np.zeros(1 << lut_bits, dtype=np.uint32)
    lut_len = np.zeros(1 << lut_bits, dtype=np.uint8)
    for i in range(len(symtab)):
        l = int(lengths[i])
        if l > lut_bits:
            continue
        cw = int(codebook.codewords[i])
        span = 1 << (lut_bits - l)
        base = cw << (lut_bits - l)
        lut_sym[base : base + span] = symtab[i]
        lut_len[base : base + span] = l

    out = np.empty(count, dtype=np.uint32)
    buf = 0
    nbuf = 0
    pos = 0  # next payload byte
    consumed = 0
    for i in range(count):
        while nbuf < lut_bits and pos < len(payload):
            buf = (buf << 8) | payload[pos]
            pos += 1
            nbuf += 8
        if nbuf >= lut_bits:
            peek = (buf >> (nbuf - lut_bits)) & ((1 << lut_bits) - 1)
            l = int(lut_len[peek])
            if l:
                out[i] = lut_sym[peek]
                nbuf -= l
                consumed += l
                continue
        # Slow path: grow the prefix bit by bit.
        acc = 0
        acclen = 0
        while True:
            if nbuf == 0:
                if pos >= len(payload):
                    raise CorruptStreamError("bit stream underrun mid-symbol")
                buf = payload[pos]
                pos += 1
                nbuf = 8
            acc = (acc << 1) | ((buf >> (nbuf - 1)) & 1)
            nbuf -= 1
            acclen += 1
            if acclen > maxlen:
                raise CorruptStreamError("invalid prefix in bit stream")
            off = acc - first_code[acclen]
            if 0 <= off < count_l[acclen]:
                out[i] = symtab[first_idx[acclen] + off]
                consumed += acclen
                break
    if consumed != bit_length:
        raise CorruptStreamError(
            f"decoded {consumed} bits but the stream declares {bit_length}"
        )
    return out
