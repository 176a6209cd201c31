"""Round trip basics: compress a smooth 2D field, check the error bound.

Run:  python demos/01_round_trip.py
"""

import numpy as np

from vlz import CompressionConfig, ErrorBound
from vlz.metrics import max_abs_error, psnr, rate, ratio
from vlz.pipeline import compress, decompress

rng = np.random.default_rng(1)

# A synthetic "climate-like" field: smooth structure plus mild noise.
y, x = np.meshgrid(np.linspace(0, 6, 400), np.linspace(0, 9, 600), indexing="ij")
data = (15.0 + 8.0 * np.sin(y) * np.cos(x) + rng.normal(0, 0.05, y.shape)).astype(
    np.float32
)

eb = 1e-3
config = CompressionConfig(ErrorBound.absolute(eb), block_edge=16, lane_width=8)
blob = compress(data, config)
back, desc = decompress(blob)

print(f"input: {desc.dims}, {data.nbytes} bytes of float32")
print(f"container: {len(blob)} bytes")
print(f"compression ratio: {ratio(data.nbytes, len(blob)):.2f}x")
print(f"rate: {rate(blob, desc):.3f} bits/element")
print(f"max |error|: {max_abs_error(data, back):.3e} (bound {eb:g})")
print(f"psnr: {psnr(data, back):.2f} dB")

assert max_abs_error(data, back) <= eb

# Tighter bounds cost more bits; the bound is honored either way.
print("\n  eb        ratio    max error")
for eb in (1e-1, 1e-2, 1e-3, 1e-4):
    cfg = CompressionConfig(ErrorBound.absolute(eb), block_edge=16, lane_width=8)
    blob = compress(data, cfg)
    back, _ = decompress(blob)
    print(f"  {eb:8.0e}  {ratio(data.nbytes, len(blob)):7.2f}  {max_abs_error(data, back):.3e}")
