"""Compressed-sensing preprocessing: distances survive random projection.

Run:  python demos/02_random_projection.py
"""

import numpy as np

from gpscreen import apply_projection, build_projection

rng = np.random.default_rng(7)
d, n_pairs = 1024, 300

for m in (16, 64, 128, 256):
    proj = build_projection(d, m, seed=42)  # deterministic in (d, m, seed)
    ratios = []
    for _ in range(n_pairs):
        x, z = rng.standard_normal(d), rng.standard_normal(d)
        ratios.append(
            np.linalg.norm(apply_projection(proj, x) - apply_projection(proj, z))
            / np.linalg.norm(x - z)
        )
    ratios = np.array(ratios)
    inside = np.mean((ratios > 0.6) & (ratios < 1.4)) * 100
    print(f"m={m:4d}: distance ratio median {np.median(ratios):.3f}, "
          f"median |distortion| {np.median(np.abs(ratios - 1)):.3f}, "
          f"{inside:.0f}% of pairs within [0.6, 1.4]")

print("\nDistortion tightens as m grows; m=128 already keeps nearly every "
      "pairwise distance within 40%, which is why the screening policies "
      "lose almost nothing when run on projected features.")
