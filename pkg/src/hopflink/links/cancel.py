"""Cancellation of two links of equal Hopf invariant, and rebalancing.

The two links sit in the state as ``+(a1|b1 + c1|1)`` and ``-(a2|b2 + c2|1)``
(plus unit loops). Each round makes the second degrees even, trades
``b2/2`` of the first degree against ``b1/2`` of the other side, and
rebalances both sides; ``a2*b2`` shrinks geometrically until every degree is
below the base threshold, where one certificate step closes the difference.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from ..errors import HopfMismatch, NonTermination
from . import codec
from .balance import balance_pair
from .terms import BalancedLink, SignedTerm, Standard, Unit, hopf_invariant
from .trace import CostModel, MoveTrace

PROGRESS = Fraction(5, 6)
MAX_RATIO = 3


@dataclass
class CancelStats:
    """Per-round measurements of one cancellation run."""

    rounds: list = field(default_factory=list)  # (a2*b2 before, after, max pairwise ratio, a2 before)
    bound: int = 0  # round budget derived from the starting a2*b2
    round_costs: list = field(default_factory=list)
    setup_cost: Fraction = Fraction(0)

    @property
    def worst_progress(self):
        ratios = [Fraction(r[1], r[0]) for r in self.rounds if r[0]]
        return max(ratios, default=None)


class _Side:
    """One signed link ``s*(a|b) + s*(c|1)`` whose terms live in the state."""

    def __init__(self, sign, a, b, c, present):
        self.sign, self.a, self.b, self.c, self.present = sign, a, b, c, present

    def terms(self):
        if not self.present:
            return ()
        return (SignedTerm(self.sign, Standard(self.a, self.b)),
                SignedTerm(self.sign, Standard(self.c, 1)))

    def balance(self, trace, model):
        if not self.present:
            return
        before = (self.a, self.b, self.c)
        self.a, self.b, self.c = balance_pair(trace, model, self.sign, *before)
        if self.a == self.b == self.c == 0 and before != (0, 0, 0):
            self.present = False  # certified away inside balance_pair

    def make_b_even(self, trace, model):
        # a|b + c|1 -> a|(b-1) + (c+a)|1 keeps c nonnegative
        if self.b % 2 == 0:
            return
        p, q = trace.record("transfer_unit", self.terms(), {"k": -1}, model)
        self.b, self.c = p.term.b, q.term.a

    def absorb(self, trace, model, st):
        """Merge a loose ``s*(1|1)`` into the c|1 term."""
        (q,) = trace.record("merge_parallel", (SignedTerm(self.sign, Standard(self.c, 1)), st),
                            None, model)
        self.c = q.term.a


def _round_budget(n: int) -> int:
    if n <= 1:
        return 1
    return math.ceil(math.log(n) / math.log(6 / 5)) + 1


def _reduce_units(trace, model, units, plus: _Side, minus: _Side):
    """Absorb same-valued unit pairs and cancel opposite ones.

    Returns loose 1|1 terms that had no side to merge into.
    """
    units = list(units)
    loose = []
    while True:
        values = [u.sign * u.term.eps for u in units]
        pick = None
        for v in (1, -1):
            idx = [k for k, w in enumerate(values) if w == v]
            if len(idx) >= 2:
                pick, move = idx[:2], "absorb_units"
                break
        if pick is None:
            if 1 in values and -1 in values:
                pick, move = [values.index(1), values.index(-1)], "cancel_pair"
            else:
                return units, loose
        consumed = tuple(units[k] for k in pick)
        units = [u for k, u in enumerate(units) if k not in pick]
        produced = trace.record(move, consumed, None, model)
        for st in produced:
            side = plus if st.sign > 0 else minus
            if side.present:
                side.absorb(trace, model, st)
            else:
                loose.append(st)


def cancel_core(trace: MoveTrace, model: CostModel, x: BalancedLink, y: BalancedLink,
                stats: CancelStats | None = None, extra_units=()) -> None:
    """Append moves reducing ``x - y`` (already in the state) to nothing.

    ``x`` and ``y`` only need nonnegative degrees; they are balanced first.
    ``extra_units`` are further unit terms in the state that take part.
    """
    start = trace.total_cost
    plus = _Side(1, x.a, x.b, x.c, not x.is_zero)
    minus = _Side(-1, y.a, y.b, y.c, not y.is_zero)
    units = list(extra_units)
    if x.eps:
        units.append(SignedTerm(1, Unit(x.eps)))
    if y.eps:
        units.append(SignedTerm(-1, Unit(y.eps)))

    plus.balance(trace, model)
    minus.balance(trace, model)
    units, loose = _reduce_units(trace, model, units, plus, minus)

    B = model.base_threshold
    stats = stats if stats is not None else CancelStats()
    stats.setup_cost = trace.total_cost - start
    if plus.present and minus.present:
        stats.bound = _round_budget(minus.a * minus.b)
    while plus.present and minus.present and max(plus.a, minus.a) >= B:
        if len(stats.rounds) >= stats.bound:
            raise NonTermination("cancellation exceeded its round budget")
        big = minus.a > B
        degrees = (plus.a, plus.b, minus.a, minus.b)
        ratio = Fraction(max(degrees), max(min(degrees), 1))
        if big and ratio > MAX_RATIO:
            raise NonTermination(f"degree ratio {ratio} exceeds {MAX_RATIO} at {degrees}")
        a2, before = minus.a, minus.a * minus.b
        spent = trace.total_cost

        plus.make_b_even(trace, model)
        minus.make_b_even(trace, model)
        p, q = trace.record("split_cancel",
                            (SignedTerm(1, Standard(plus.a, plus.b)),
                             SignedTerm(-1, Standard(minus.a, minus.b))), None, model)
        plus.a, minus.a = p.term.a, q.term.a
        plus.balance(trace, model)
        minus.balance(trace, model)

        after = minus.a * minus.b
        stats.rounds.append((before, after, ratio, a2))
        stats.round_costs.append(trace.total_cost - spent)
        if big and after * PROGRESS.denominator > before * PROGRESS.numerator:
            raise NonTermination(f"a2*b2 went {before} -> {after}, worse than 5/6")

    rest = tuple(plus.terms()) + tuple(minus.terms()) + tuple(units) + tuple(loose)
    if rest:
        assert hopf_invariant(rest) == 0
        trace.record("null_certificate", rest, {"groups": [len(rest)], "measure": "degree"}, model)


def cancel(x: BalancedLink, y: BalancedLink, model: CostModel | None = None,
           stats: CancelStats | None = None) -> MoveTrace:
    """Trace taking ``x - y`` to the empty expression."""
    model = model or CostModel()
    if x.hopf != y.hopf:
        raise HopfMismatch(f"cannot cancel links of Hopf invariant {x.hopf} and {y.hopf}")
    trace = MoveTrace()
    cancel_core(trace, model, x, y, stats)
    return trace


def rebalance(x: BalancedLink, target: BalancedLink, model: CostModel | None = None) -> MoveTrace:
    """Trace taking ``x`` to ``target``: insert ``target - target`` and cancel."""
    model = model or CostModel()
    if x.hopf != target.hopf:
        raise HopfMismatch(f"Hopf invariants differ ({x.hopf} vs {target.hopf})")
    trace = MoveTrace()
    if x == target:
        return trace
    if target.terms(1):
        trace.record("insert_pair", (), {"terms": codec.terms_to_json(target.terms(1))}, model)
    cancel_core(trace, model, x, target)
    return trace
