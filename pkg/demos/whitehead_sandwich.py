"""Squeeze the planned homotopy cost of Whitehead-style maps between the length lower bound and the plan.

Run: python demos/whitehead_sandwich.py
"""
from hopflink.bounds import LowerBoundQuery, lower_bound_length
from hopflink.coarsening import plan_homotopy, zero_map
from hopflink.coarsening.cubical import flux_through, whitehead_map
from hopflink.links import CostModel

kappa = CostModel().kappa
print(f"{'L':>4} {'flux':>6} {'lower':>7} {'plan/kappa':>11}")
for N in (2, 3, 4):
    L = 2 ** N
    m = whitehead_map(N)  # Hopf total 0, so it is null-homotopic; only the flux makes it expensive
    rep = plan_homotopy(m, zero_map(N), keep_traces=False)
    lower = lower_bound_length(LowerBoundQuery(L, 2, 1)).length
    print(f"{L:>4} {flux_through(m):>6} {float(lower):>7.1f} {float(rep.total_cost / kappa):>11.1f}")
