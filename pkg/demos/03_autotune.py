"""Autotuning block edge and lane width by timing sampled blocks.

Run:  python demos/03_autotune.py
"""

import numpy as np

from vlz import CompressionConfig, ErrorBound
from vlz.autotune import TuneSpace, apply_chosen, autotune, narrowed_autotune
from vlz.pipeline import compress

rng = np.random.default_rng(3)
data = rng.normal(0, 1, (256, 256)).astype(np.float32).cumsum(axis=1)

space = TuneSpace.build()
print(f"tune space ({len(space.configs)} configurations): {space.configs}\n")

base = CompressionConfig(ErrorBound.absolute(1e-3))
report = autotune(data, space, fraction=0.2, iterations=3, seed=1, base=base)

print("block  lanes     mean time      stddev   chosen")
for (b, l), m, s in zip(report.configs, report.mean_s, report.std_s):
    mark = "  <--" if (b, l) == report.chosen else ""
    print(f"{b:5d}  {l:5d}  {m * 1e3:9.3f} ms  {s * 1e3:8.3f}{mark}")
print(f"\ntuning took {report.tuning_seconds * 1e3:.1f} ms "
      f"(fraction={report.sample_fraction}, iterations={report.iterations})")

config = apply_chosen(base, report)
blob = compress(data, config)
print(f"compressed with the tuned config: {len(blob)} bytes")

# Across time-steps the winner is mostly stable, so later steps can tune
# over just the historically best two configurations.
history = [report.chosen] * 3 + [space.configs[0]]
narrowed = narrowed_autotune(history, space, k=2)
print(f"narrowed space after 4 steps of history: {narrowed.configs}")
