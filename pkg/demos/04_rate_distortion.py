"""Rate-distortion: sweep the error bound, report bits/element vs PSNR.

Run:  python demos/04_rate_distortion.py
"""

import numpy as np

from vlz import CompressionConfig, ErrorBound
from vlz.metrics import psnr, rate
from vlz.model import ArrayDescriptor
from vlz.pipeline import compress, decompress

rng = np.random.default_rng(9)
z, y, x = np.meshgrid(
    np.linspace(0, 3, 48), np.linspace(0, 5, 64), np.linspace(0, 7, 64), indexing="ij"
)
data = (2.0 + np.sin(z + y) * np.cos(x) + rng.normal(0, 0.01, z.shape)).astype(
    np.float32
)
desc = ArrayDescriptor.from_array(data)

print("eb        rate (bits/elem)   psnr (dB)   outliers")
for eb in (1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4):
    cfg = CompressionConfig(ErrorBound.absolute(eb), block_edge=16, lane_width=8)
    blob = compress(data, cfg)
    back, _ = decompress(blob)
    from vlz.container import deserialize

    n_out = int(deserialize(blob).outlier_counts.sum())
    print(f"{eb:8.0e}  {rate(blob, desc):16.3f}   {psnr(data, back):9.2f}   {n_out:8d}")

print("\nsmaller bounds monotonically buy PSNR with bits, the rate-distortion trade")
