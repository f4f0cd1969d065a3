"""Bringing a link a|b + c|1 into balanced form by halving/doubling rounds."""
from __future__ import annotations

from ..errors import NonTermination, PreconditionError
from .moves import halving_round_degrees
from .terms import BalancedLink, LinkExpression, SignedTerm, Standard, Unit
from .trace import CostModel, MoveTrace


class _Pair:
    """Mutable view of ``s*(a|b) + s*(c|1)`` inside a larger trace."""

    def __init__(self, trace: MoveTrace, model: CostModel, sign: int, a: int, b: int, c: int):
        self.trace, self.model, self.sign = trace, model, sign
        self.a, self.b, self.c = a, b, c

    @property
    def main(self):
        return SignedTerm(self.sign, Standard(self.a, self.b))

    @property
    def aux(self):
        return SignedTerm(self.sign, Standard(self.c, 1))

    def _both(self, move, **params):
        (p, q) = self.trace.record(move, (self.main, self.aux), params, self.model)
        self.a, self.b, self.c = p.term.a, p.term.b, q.term.a

    def transfer(self, k):
        self._both("transfer_unit", k=k)

    def peel(self, k=1):
        self._both("peel", k=k)

    def shift(self):
        (p,) = self.trace.record("shift_double", (self.main,), None, self.model)
        self.a, self.b = p.term.a, p.term.b

    def shift_unit(self):
        self._both("shift_unit")

    def halving_round(self):
        self._both("halving_round")

    def transpose(self):
        (p,) = self.trace.record("transpose", (self.main,), None, self.model)
        self.a, self.b = p.term.a, p.term.b

    def reduce_c(self):
        """Transfer whole copies of a between b and c until 0 <= c <= a."""
        if self.a <= 0:
            return 0
        if self.c > self.a:
            k = (self.c - 1) // self.a
            self.transfer(k)
            return k
        if self.c < 0:
            k = -((-self.c + self.a - 1) // self.a)
            self.transfer(k)
            return k
        return 0

    def link(self, eps=0) -> BalancedLink:
        return BalancedLink(self.a, self.b, self.c, eps)

    @property
    def balanced(self) -> bool:
        return self.link().is_balanced


def max_rounds(a: int) -> int:
    return max(a, 1).bit_length() + 8


def balance_pair(trace: MoveTrace, model: CostModel, sign: int, a: int, b: int, c: int):
    """Balance ``sign*(a|b + c|1)`` in place; returns final (a, b, c).

    Steps are appended to ``trace``. Requires nonnegative degrees.
    """
    pair = _Pair(trace, model, sign, a, b, c)
    if pair.balanced and not (a == b == 0 and c == 0):
        return pair.a, pair.b, pair.c
    if pair.a < pair.b:
        pair.transpose()
    if pair.b == 0:
        if pair.a == 0 and pair.c == 0:
            trace.record("null_certificate", (pair.main, pair.aux), {"groups": [2]}, model)
            return 0, 0, 0
        # a|0 is null: turn it into 0|1 and let c|1 play the main role
        (z,) = trace.record("reshape_null", (pair.main,), None, model)
        pair.a, pair.b, pair.c = pair.c, 1, 0
        if pair.a == 0:
            trace.record("null_certificate", (pair.main, pair.aux), {"groups": [2]}, model)
            return 0, 0, 0
    pair.reduce_c()
    if pair.b > pair.a:
        pair.transpose()

    slack = 3 * model.balance_slack // 2
    limit = max_rounds(max(a, c))
    steps = 0
    while not pair.balanced:
        steps += 1
        if steps > limit:
            raise NonTermination("balance exceeded its iteration bound")
        if pair.a < pair.b:
            pair.transpose()
        elif pair.a > 2 * pair.b:
            ra, rb, rc = halving_round_degrees(pair.a, pair.b, pair.c)
            if pair.a > 2 * pair.b + slack or ra - 2 * rb < pair.a - 2 * pair.b - 1:
                pair.halving_round()
            else:
                # within the additive slack: move degree from a to b directly
                pair.shift_unit()
        else:
            pair.reduce_c()
    return pair.a, pair.b, pair.c


def _parse(x):
    """Accept a BalancedLink or an expression of shape a|b + c|1 (+ unit)."""
    if isinstance(x, BalancedLink):
        return 1, x.a, x.b, x.c, x.terms(1)
    terms = tuple(x.terms if isinstance(x, LinkExpression) else x)
    units = [t for t in terms if isinstance(t.term, Unit)]
    stds = [t for t in terms if isinstance(t.term, Standard)]
    if len(units) > 1 or len(stds) != 2 or len(units) + len(stds) != len(terms):
        raise PreconditionError("expected an expression a|b + c|1 (+ unit)")
    signs = {t.sign for t in stds}
    if len(signs) != 1:
        raise PreconditionError("standard summands must share a sign")
    main, aux = stds
    if aux.term.b != 1 and main.term.b == 1:
        main, aux = aux, main
    if aux.term.b != 1:
        raise PreconditionError("second summand must have the form c|1")
    sign = signs.pop()
    return sign, main.term.a, main.term.b, aux.term.a, terms


def balance(x, model: CostModel | None = None):
    """Balance ``a|b + c|1 (+ 1~)`` keeping its Hopf invariant.

    Returns the balanced link and the trace of moves. Raises
    PreconditionError unless a >= b >= 0 and 0 <= c <= 8a.
    """
    model = model or CostModel()
    sign, a, b, c, terms = _parse(x)
    units = [t for t in terms if isinstance(t.term, Unit)]
    eps = units[0].term.eps * units[0].sign * sign if units else 0
    if sign != 1:
        raise PreconditionError("balance acts on positively signed links")
    if b < 0 or a < b or c < 0 or c > 8 * a:
        raise PreconditionError(f"balance needs a >= b >= 0 and 0 <= c <= 8a, got {a}|{b}+{c}|1")
    trace = MoveTrace()
    if BalancedLink(a, b, c).is_balanced and not (a == b == c == 0):
        return BalancedLink(a, b, c, eps), trace
    a2, b2, c2 = balance_pair(trace, model, sign, a, b, c)
    out = BalancedLink(a2, b2, c2, eps)
    assert out.is_balanced and out.hopf == 2 * (a * b + c) + eps
    return out, trace
