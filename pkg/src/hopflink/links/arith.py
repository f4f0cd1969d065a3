"""Representing a Hopf invariant by links, and adding/subtracting balanced links."""
from __future__ import annotations

from math import isqrt

from ..errors import HopfMismatch
from . import codec
from .cancel import cancel_core
from .terms import BalancedLink, LinkExpression, SignedTerm, Standard, Unit, hopf_invariant
from .trace import CostModel, MoveTrace


def represent_hopf(h: int) -> LinkExpression:
    """``sign*(a|b + c|1) + r*1~`` with a = isqrt|n|, b = |n|//a, c = |n| - ab, h = 2n + r."""
    r = h % 2 if h >= 0 else -((-h) % 2)
    n = (h - r) // 2
    terms = []
    if n:
        s = 1 if n > 0 else -1
        m = abs(n)
        a = isqrt(m)
        b = m // a
        terms = [SignedTerm(s, Standard(a, b)), SignedTerm(s, Standard(m - a * b, 1))]
    if r:
        terms.append(SignedTerm(1, Unit(r)))
    out = LinkExpression(tuple(terms))
    assert hopf_invariant(out) == h
    return out


def _piece(h: int, d: int, eps: int) -> BalancedLink:
    """Link ``d|e + f|1 + eps`` of invariant h with f < d (f = n when d = 0)."""
    n = (h - eps) // 2
    assert 2 * n + eps == h and n >= 0
    if d == 0:
        return BalancedLink(0, 0, 0, eps) if n == 0 else BalancedLink(n, 1, 0, eps)
    return BalancedLink(d, n // d, n % d, eps)


def _unit_choices(hx: int, hy: int, eps_t: int):
    """Unit multiplicities for the two pieces, closest match to eps_t first."""
    opts = []
    for ex in (-1, 0, 1):
        for ey in (-1, 0, 1):
            if (hx - ex) % 2 or (hy - ey) % 2 or hx < ex or hy < ey:
                continue
            opts.append((abs(ex + ey - eps_t), ex, ey))
    opts.sort()
    return opts


def _merge_second(trace, model, sign, d, e1, e2):
    """``d|e1 + d|e2 -> d|(e1+e2)`` through transposes and a parallel merge."""
    (p,) = trace.record("transpose", (SignedTerm(sign, Standard(d, e1)),), None, model)
    (q,) = trace.record("transpose", (SignedTerm(sign, Standard(d, e2)),), None, model)
    (m,) = trace.record("merge_parallel", (p, q), None, model)
    trace.record("transpose", (m,), None, model)


def _split_second(trace, model, sign, d, e1, e2):
    """``d|(e1+e2) -> d|e1 + d|e2``."""
    (p,) = trace.record("transpose", (SignedTerm(sign, Standard(d, e1 + e2)),), None, model)
    q1, q2 = trace.record("split_parallel", (p,), {"first": e1}, model)
    trace.record("transpose", (q1,), None, model)
    trace.record("transpose", (q2,), None, model)


def _unit(sign, eps):
    return SignedTerm(sign, Unit(eps))


def _insert(trace, model, terms):
    return trace.record("insert_pair", (), {"terms": codec.terms_to_json(tuple(terms))}, model)


def add_balanced(x: BalancedLink, y: BalancedLink, target: BalancedLink, subtract: bool = False,
                 model: CostModel | None = None) -> MoveTrace:
    """Trace taking ``x + y`` (or ``x - y``) to ``target``.

    Addition rebalances x and y into links sharing the first degree of the
    target and merges them; subtraction rebalances x into target plus such a
    piece of y's invariant, splits it off and cancels it against ``-y``.
    """
    model = model or CostModel()
    sy = -1 if subtract else 1
    if target.hopf != x.hopf + sy * y.hopf:
        op = "-" if subtract else "+"
        raise HopfMismatch(f"target invariant {target.hopf} != {x.hopf} {op} {y.hopf}")
    trace = MoveTrace()
    if y.is_zero and not y.eps and x == target:
        return trace
    if all(max(t.a, t.b, t.c) < model.base_threshold for t in (x, y, target)):
        # everything sits in the finite table: one certificate closes x +- y - target
        if target.terms(1):
            _insert(trace, model, target.terms(1))
        rest = x.terms(1) + y.terms(sy) + target.terms(-1)
        if rest:
            trace.record("null_certificate", rest, {"groups": [len(rest)]}, model)
    elif y.is_zero or target.is_zero:
        _through_units(trace, model, x, y, target, sy)
    elif subtract:
        _subtract(trace, model, x, y, target)
    else:
        _add(trace, model, x, y, target)
    return trace


def _through_units(trace, model, x, y, target, sy):
    """One side is a bare unit loop: cancel the big link directly."""
    if target.terms(1):
        _insert(trace, model, target.terms(1))
    if target.is_zero:
        # x +- y = eps_t with one of them large: cancel x against the other
        extra = [_unit(-1, target.eps)] if target.eps else []
        big, small = (x, y) if sy < 0 else (x, None)
        if small is None:
            raise HopfMismatch("a sum of two links cannot collapse to a unit unless both are small")
        cancel_core(trace, model, big, small, extra_units=extra)
    else:
        extra = [_unit(sy, y.eps)] if y.eps else []
        cancel_core(trace, model, BalancedLink(x.a, x.b, x.c, 0), target,
                    extra_units=extra + ([_unit(1, x.eps)] if x.eps else []))


def _add(trace, model, x, y, target):
    d = target.a
    _, ex, ey = _unit_choices(x.hopf, y.hopf, target.eps)[0]
    px, py = _piece(x.hopf, d, ex), _piece(y.hopf, d, ey)
    for link, piece in ((x, px), (y, py)):
        if link != piece:
            _insert(trace, model, piece.terms(1))
            cancel_core(trace, model, link, piece)
    # d|e1 + f1|1 + d|e2 + f2|1 (+ units) -> target
    _merge_second(trace, model, 1, d, px.b, py.b)
    trace.record("merge_parallel", (SignedTerm(1, Standard(px.c, 1)),
                                    SignedTerm(1, Standard(py.c, 1))), None, model)
    e, f = px.b + py.b, px.c + py.c
    delta = ex + ey - target.eps
    if e != target.b:
        k = target.b - e
        trace.record("transfer_unit", (SignedTerm(1, Standard(d, e)), SignedTerm(1, Standard(f, 1))),
                     {"k": k}, model)
        e, f = e + k, f - k * d
    units = [_unit(1, u) for u in (ex, ey) if u]
    if delta == 0 and len(units) == 2:
        trace.record("cancel_pair", tuple(units), None, model)
    elif delta == 2:
        (one,) = trace.record("absorb_units", tuple(units), None, model)
        trace.record("merge_parallel", (SignedTerm(1, Standard(f, 1)), one), None, model)
        f += 1
    elif delta == -2:
        # borrow 1|1 from the c-term: insert 1~ - 1~, absorb two -1~, cancel
        one, rest = trace.record("split_parallel", (SignedTerm(1, Standard(f, 1)),), {"first": 1}, model)
        neg1, pos1 = _insert(trace, model, [_unit(1, 1)])
        (m1,) = trace.record("absorb_units", (units[0], neg1), None, model)
        trace.record("cancel_pair", (one, m1), None, model)
        if len(units) == 2:
            trace.record("cancel_pair", (units[1], pos1), None, model)
        f -= 1
    assert (e, f) == (target.b, target.c)


def _subtract(trace, model, x, y, target):
    d = target.a
    # x ~ target + Y' where Y' = d|e' + f'|1 (+ unit) carries y's invariant
    choices = [ey for ey in (0, 1, -1)
               if (y.hopf - ey) % 2 == 0 and y.hopf >= ey and target.eps + ey in (-1, 0, 1)]
    ey = choices[0]
    py = _piece(y.hopf, d, ey)
    ux = target.eps + ey
    joint = BalancedLink(d, target.b + py.b, target.c + py.c, ux)
    if x != joint:
        _insert(trace, model, joint.terms(1))
        cancel_core(trace, model, x, joint)
    _split_second(trace, model, 1, d, target.b, py.b)
    trace.record("split_parallel", (SignedTerm(1, Standard(target.c + py.c, 1)),),
                 {"first": target.c}, model)
    extra = []
    if ux == 0 and target.eps:
        # joint carried no unit: make target's from an inserted pair
        neg, _ = _insert(trace, model, [_unit(1, target.eps)])
        extra.append(neg)
    elif ey:
        extra.append(_unit(1, ux))
    cancel_core(trace, model, BalancedLink(py.a, py.b, py.c, 0), y, extra_units=extra)
