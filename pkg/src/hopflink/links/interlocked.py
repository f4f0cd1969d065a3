"""Interlocked and twisted links and their reduction to balanced links.

An interlocked link is split into eight pieces with roughly halved data:
the stripes of A and B are cut at the middle (lower A against upper B, upper
A against lower B keep the staircase pattern; upper A against upper B is a
plain standard link), then every entry is halved. The standard middle link
and the old partner are redistributed into eight balanced partners. All
pairs of one level are split in parallel, so a level costs as much as its
largest interlocked piece.
"""
from __future__ import annotations

from functools import lru_cache

from ..errors import HopfMismatch, MoveError, NonTermination
from . import codec
from .arith import add_balanced
from .terms import (BalancedLink, Interlocked, LinkExpression, SignedTerm, Standard, Twisted, Unit,
                    balanced_for_hopf, ceil_sqrt, hopf_invariant, term_hopf, term_size)
from .trace import CostModel, MoveTrace, register
from .moves import groups_of

ZERO = Interlocked(1, (0,), (0,))


def _halves(xs):
    hi = tuple((x + 1) // 2 for x in xs)
    lo = tuple(x // 2 for x in xs)
    return hi, lo


@lru_cache(maxsize=1 << 14)
def split_pieces(t: Interlocked) -> list:
    """The eight interlocked pieces of ``t`` (lower/upper cut, then halving)."""
    n = t.n
    m, fl = (n + 1) // 2, n // 2
    left = Interlocked(m, t.a[:m], t.b[fl:])
    right = Interlocked(fl, t.a[m:], t.b[:fl]) if fl else ZERO
    out = []
    for half in (left, right):
        ahi, alo = _halves(half.a)
        bhi, blo = _halves(half.b)
        for aa in (ahi, alo):
            for bb in (bhi, blo):
                out.append(Interlocked(half.n, aa, bb))
    return tuple(out)


def middle_link(t: Interlocked) -> Standard:
    m, fl = (t.n + 1) // 2, t.n // 2
    return Standard(sum(t.a[m:]), sum(t.b[fl:]))


def _parse_group(group):
    """A group is ``s*I`` followed by the terms of its partner link with sign -s."""
    if not group or not isinstance(group[0].term, Interlocked):
        raise MoveError("a split group starts with an interlocked term")
    s = group[0].sign
    for st in group[1:]:
        if st.sign != -s or not isinstance(st.term, (Standard, Unit)):
            raise MoveError("the partner enters as oppositely signed standard links and unit loops")
    if hopf_invariant(group) != 0:
        raise MoveError("interlocked term and partner carry different invariants")
    return s, group[0].term


def _level_cost(consumed, params, model):
    groups = groups_of(consumed, params)
    return model.kappa * max(term_size(g[0].term) for g in groups)


@register("split_interlocked", _level_cost, ("groups",))
def _split_interlocked(consumed, params, model):
    # every group is +I - P; pieces get canonical balanced partners
    out = []
    for g in groups_of(consumed, params):
        s, t = _parse_group(g)
        for piece in split_pieces(t):
            out.append(SignedTerm(s, piece))
            out.extend(balanced_for_hopf(term_hopf(piece)).terms(-s))
    return tuple(out)


def _twist_cost(consumed, params, model):
    return model.kappa * max(term_size(st.term) for st in consumed)


def twist_packing(d: int):
    """Interlocked part and remainder invariant of the twisted link of degree d.

    The d wires sit in rows of at most m = ceil(sqrt d), the last row holding
    a single wire (row i holds a_i wires). Ring wire counts b_j <= m are
    filled greedily, outermost first; with a one-wire last row the rest of
    d(d-1)/2 is 0 or 1 and becomes a unit loop.
    """
    if d <= 1:
        return None, 0
    m = ceil_sqrt(d)
    k, t = divmod(d - 1, m)
    a = [m] * k + ([t] if t else []) + [1]
    rows = len(a)
    want = d * (d - 1) // 2
    b = [0] * rows
    left = want
    for j in range(rows, 0, -1):
        s = sum(a[rows - j:])  # rows linked by ring j
        b[j - 1] = min(m, left // (2 * s))
        left -= 2 * s * b[j - 1]
    inter = Interlocked(rows, tuple(a), tuple(b))
    rest = want - term_hopf(inter)
    assert rest == left and rest in (0, 1), (d, rest)
    return inter, rest


@register("twist_to_interlocked", _twist_cost)
def _twist_to_interlocked(consumed, params, model):
    if len(consumed) != 1 or not isinstance(consumed[0].term, Twisted):
        raise MoveError("twist_to_interlocked consumes one twisted link")
    s = consumed[0].sign
    inter, rest = twist_packing(consumed[0].term.d)
    if inter is None:
        return ()
    return (SignedTerm(s, inter),) + balanced_for_hopf(rest).terms(s)


def _group_terms(t, partner):
    return (SignedTerm(1, t),) + partner.terms(-1)


def split_interlocked_step(t: Interlocked, partner: BalancedLink, model: CostModel | None = None):
    """Split ``t - partner`` into eight (interlocked, balanced) pairs."""
    model = model or CostModel()
    if term_hopf(t) != partner.hopf:
        raise HopfMismatch(f"interlocked invariant {term_hopf(t)} != partner {partner.hopf}")
    trace = MoveTrace()
    group = _group_terms(t, partner)
    produced = trace.record("split_interlocked", group, {"groups": [len(group)]}, model)
    pairs = [(p, balanced_for_hopf(term_hopf(p))) for p in split_pieces(t)]
    assert sum(len(_group_terms(*pp)) for pp in pairs) == len(produced)
    return pairs, trace


def interlocked_to_balanced(t: Interlocked, target: BalancedLink,
                            model: CostModel | None = None) -> MoveTrace:
    """Trace taking the interlocked link ``t`` to ``target``."""
    model = model or CostModel()
    h = term_hopf(t)
    if h != target.hopf:
        raise HopfMismatch(f"interlocked invariant {h} != target {target.hopf}")
    trace = MoveTrace()
    if target.terms(1):
        trace.record("insert_pair", (), {"terms": codec.terms_to_json(target.terms(1))}, model)
    small = model.small_size

    def done(pair):
        return max(term_size(st.term) for st in _group_terms(*pair)) < small

    pending = [(t, target)]
    finished = []
    limit = max(term_size(t), target.size, 1).bit_length() + 4
    for _ in range(limit):
        finished.extend(p for p in pending if done(p))
        pending = [p for p in pending if not done(p)]
        if not pending:
            break
        consumed, lens = [], []
        for p in pending:
            g = _group_terms(*p)
            consumed.extend(g)
            lens.append(len(g))
        trace.record("split_interlocked", tuple(consumed), {"groups": lens}, model)
        pending = [(q, balanced_for_hopf(term_hopf(q))) for p in pending for q in split_pieces(p[0])]
    else:
        raise NonTermination("interlocked splitting did not reach the base size")
    consumed, lens = [], []
    for p in finished:
        g = _group_terms(*p)
        consumed.extend(g)
        lens.append(len(g))
    if consumed:
        trace.record("null_certificate", tuple(consumed), {"groups": lens, "measure": "size"}, model)
    return trace


def twisted_to_interlocked(t: Twisted, model: CostModel | None = None):
    """Rewrite a twisted link as interlocked + signed balanced remainder."""
    model = model or CostModel()
    trace = MoveTrace()
    produced = trace.record("twist_to_interlocked", (SignedTerm(1, t),), None, model)
    return LinkExpression(produced), trace


def twisted_to_balanced(t: Twisted, target: BalancedLink, model: CostModel | None = None) -> MoveTrace:
    """Twisted link -> interlocked + remainder -> one balanced link."""
    model = model or CostModel()
    h = t.d * (t.d - 1) // 2
    if h != target.hopf:
        raise HopfMismatch(f"twisted invariant {h} != target {target.hopf}")
    expr, trace = twisted_to_interlocked(t, model)
    inter, rest = twist_packing(t.d)
    if inter is None:
        if target.terms(1):
            trace.record("insert_pair", (), {"terms": codec.terms_to_json(target.terms(1))}, model)
            rest_terms = target.terms(-1)
            trace.record("null_certificate", rest_terms, {"groups": [len(rest_terms)]}, model)
        return trace
    h_inter = term_hopf(inter)
    if rest == max(target.eps, 0):
        # the interlocked part lands on the target's standard terms; the unit
        # loop left by the twist is already the target's unit
        trace.extend(interlocked_to_balanced(inter, BalancedLink(target.a, target.b, target.c, 0), model))
        return trace
    mid = balanced_for_hopf(h_inter)
    trace.extend(interlocked_to_balanced(inter, mid, model))
    trace.extend(add_balanced(mid, balanced_for_hopf(rest), target, model=model))
    return trace
