"""Comb one random cable into another and dump the frames for plotting.

Run: python demos/comb_cables.py [out.csv]
"""
import sys

import numpy as np

from hopflink.cable_geometry import audit_homotopy, comb, random_cable, speed_limit

rng = np.random.default_rng(7)
n, a = 4, 10
c1 = random_cable(rng, n, a)
c2 = random_cable(rng, n, a, widths=c1.widths)
print(f"two cables of size {n}, length {a}, stripe widths {list(c1.widths)}")

hom = comb(c1, c2)
for name, lo, hi in hom.phases:
    print(f"  phase {name:<16} frames {lo}..{hi}")
rep = audit_homotopy(hom, start=c1, end=c2)
print(f"audit {'ok' if rep else 'FAILED'}: {rep.frames} frames, speeds {rep.alpha_speed:.3f} (alpha) "
      f"{rep.time_speed:.3f} (time), limit {float(speed_limit())}")

if len(sys.argv) > 1:
    hom.write_csv(sys.argv[1])
    print("frames written to", sys.argv[1])
