"""Walk a lopsided Hopf link through balancing, then cancel it against a second balanced link.

Run: python demos/balance_walkthrough.py
"""
from fractions import Fraction

from hopflink.bounds import Sqrt, series_ceiling
from hopflink.links import (CancelStats, CostModel, LinkExpression, Standard, balance, balanced_for_hopf,
                            cancel, hopf_invariant)

model = CostModel()

# a long, thin link 200000|5 plus a loose 900|1; invariant 2*200000*5 + 2*900 = 2001800
x = LinkExpression.of(Standard(200000, 5), Standard(900, 1))
print("start:", x, " H =", hopf_invariant(x))

out, trace = balance(x, model)
print(f"\nbalance used {len(trace)} moves")
for i, st in enumerate(trace):
    print(f"  {i:2d} {st.move:<18} cost {float(st.cost):8.2f}   H {st.hopf_before} -> {st.hopf_after}")
print("balanced:", out, " H =", out.hopf)

# the halving series caps the cost at kappa * sqrt(a+1) / (1 - 1/sqrt 2)
cap = model.kappa * series_ceiling(Sqrt(200001), Sqrt(Fraction(1, 2))).closed_form
print(f"total {float(trace.total_cost):.2f} vs series ceiling {float(cap):.2f}")

# any other balanced link with the same invariant can be cancelled against it
y = balanced_for_hopf(out.hopf)
stats = CancelStats()
ct = cancel(out, y, model, stats)
print(f"\ncancel {out} against {y}: {len(ct)} moves, cost {float(ct.total_cost):.2f}")
# each round shrinks the larger product a2*b2 by at least 5/6 until a2 drops below the threshold
for before, after, ratio, a2 in stats.rounds:
    print(f"  a2*b2 {before:>8} -> {after:>8}   shrink {after / before:.3f}   a2 = {a2}")
