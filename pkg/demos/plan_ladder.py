"""Plan homotopies between random map pairs on a ladder of grid sizes and watch the cost double.

Run: python demos/plan_ladder.py [Nmax]   (default 5; N = 6 takes around 20 s)
"""
import sys
import time

import numpy as np

from hopflink.bounds import verify_linear_scaling
from hopflink.coarsening import plan_homotopy, random_pair

nmax = int(sys.argv[1]) if len(sys.argv) > 1 else 5
rng = np.random.default_rng(2024)
points = []
for N in range(2, nmax + 1):
    t0 = time.perf_counter()
    f0, f1 = random_pair(rng, N)
    rep = plan_homotopy(f0, f1, keep_traces=False)
    dt = time.perf_counter() - t0
    levels = " ".join(f"{float(c):7.1f}" for c in rep.level_costs)
    print(f"N={N}  H={rep.hopf_total:6d}  levels [{levels} ]  total {float(rep.total_cost):8.1f}  ({dt:.1f} s)")
    points.append((N, rep.total_cost))

# one pair per N is noisy at N = 2; the acceptance suite uses several
v = verify_linear_scaling(points)
print("\nsuccessive ratios:", [round(float(r), 2) for r in v.ratios])
print(f"C_total = {float(v.C_total):.2f}, linear: {bool(v)}", "" if v else f"({v.reason})")
