"""Link calculus: worked examples, error cases and property tests."""
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from helpers import ref_hopf, ref_term_hopf, sample_traces
from hopflink.coarsening.oracle import _circle, linking_oracle, twisted_loops
from hopflink.errors import HopfMismatch, MismatchedMove, ParityError, PreconditionError
from hopflink.links import (BalancedLink, CancelStats, CostModel, Interlocked, LinkExpression, MoveTrace,
                            SignedTerm, Standard, Twisted, Unit, absorb_units, add_balanced, balance,
                            balanced_for_hopf, cancel, hopf_invariant, interlocked_to_balanced, merge_parallel,
                            rebalance, represent_hopf, shift_double, size, split_interlocked_step, transfer_unit,
                            twisted_to_balanced, twisted_to_interlocked, verify_trace)
from hopflink.links import codec
from hopflink.links.interlocked import middle_link, split_pieces
from hopflink.links.trace import MoveStep


def E(*terms):
    return LinkExpression.of(*terms)


def U(eps=1):
    return Unit(eps)


# ---- invariant and size ----

@pytest.mark.parametrize("term,h", [(Standard(3, 5), 30), (Standard(0, 7), 0), (Twisted(4), 6),
                                    (Interlocked(2, (1, 1), (1, 1)), 6), (Unit(1), 1), (Unit(-1), -1),
                                    (Twisted(1), 0), (Twisted(0), 0)])
def test_hopf_examples(term, h):
    assert hopf_invariant(E(term)) == h


def test_hopf_of_signed_sum():
    e = LinkExpression((SignedTerm(1, Standard(3, 5)), SignedTerm(-1, Standard(2, 2)), SignedTerm(1, U())))
    assert hopf_invariant(e) == 30 - 8 + 1


def test_twisted_four_against_polyline_oracle():
    loops, mult = twisted_loops(4)
    assert linking_oracle(loops, mult).hopf == 6


@pytest.mark.parametrize("d", [2, 3, 5])
def test_twisted_against_polyline_oracle(d):
    loops, mult = twisted_loops(d)
    assert linking_oracle(loops, mult).hopf == d * (d - 1) // 2


def _interlocked_two_by_two():
    """Wire diagram of Interlocked{2,(1,1),(1,1)}: A1-B2, A2-B1 and A2-B2 linked, nothing else."""
    A1 = _circle((0, 0, 0), 1, plane="xy")
    A2 = _circle((5, 0, 0), 1, plane="xy")
    B2 = [(Fraction(0), Fraction(0), Fraction(-2)), (Fraction(0), Fraction(0), Fraction(2)),
          (Fraction(5), Fraction(0), Fraction(2)), (Fraction(5), Fraction(0), Fraction(-2))]
    B1 = _circle((6, Fraction(3, 10), 0), Fraction(4, 5), plane="xz")
    loops = [A1, A2, B1, B2]
    lk = linking_oracle(loops).lk
    if lk[0, 3] < 0:
        loops[3] = loops[3][::-1]
    if linking_oracle(loops).lk[1, 3] < 0:
        loops[1] = loops[1][::-1]
    if linking_oracle(loops).lk[1, 2] < 0:
        loops[2] = loops[2][::-1]
    return loops


def test_interlocked_against_polyline_oracle():
    res = linking_oracle(_interlocked_two_by_two())
    lk = res.lk_int
    # staircase pattern: A_i links B_j iff i + j > 2
    assert lk[0, 2] == 0 and lk[0, 3] == 1 and lk[1, 2] == 1 and lk[1, 3] == 1
    assert lk[0, 1] == 0 and lk[2, 3] == 0
    assert res.hopf == 6 == hopf_invariant(E(Interlocked(2, (1, 1), (1, 1))))


@pytest.mark.parametrize("obj,s", [(Standard(16, 4), 4), (Interlocked(4, (8,) * 4, (8,) * 4), 8), (Unit(1), 1),
                                   (Standard(-9, 2), 3), (Twisted(10), 4)])
def test_size_examples(obj, s):
    assert size(obj) == s


def test_expression_size_has_packing_slack():
    e = E(Standard(16, 4), Standard(2, 1), U())
    assert size(e) == 4 + math.ceil(math.log2(1 + 3))


@given(st.integers(1, 40))
def test_expression_slack_formula(n):
    e = LinkExpression.of(*[Standard(1, 1)] * n)
    assert size(e) == 1 + math.ceil(math.log2(1 + n))


# ---- elementary moves ----

def test_merge_parallel():
    e, step = merge_parallel(E(Standard(3, 5), Standard(4, 5)), 0, 1)
    assert e == E(Standard(7, 5)) and step.hopf_before == step.hopf_after == 70
    assert step.cost == size(E(Standard(3, 5), Standard(4, 5)))
    e, _ = merge_parallel(E(Standard(0, 3), Standard(6, 3)), 0, 1)
    assert e == E(Standard(6, 3))


def test_merge_parallel_mismatch():
    with pytest.raises(MismatchedMove):
        merge_parallel(E(Standard(2, 3), Standard(2, 4)), 0, 1)
    with pytest.raises(MismatchedMove):
        merge_parallel(LinkExpression((SignedTerm(1, Standard(2, 3)), SignedTerm(-1, Standard(2, 3)))), 0, 1)


def test_shift_double():
    e, step = shift_double(E(Standard(16, 1)), 0)
    assert e == E(Standard(8, 2))
    assert shift_double(E(Standard(0, 3)), 0)[0] == E(Standard(0, 6))
    assert shift_double(E(Standard(8, 2)), 0, inverse=True)[0] == E(Standard(16, 1))
    with pytest.raises(ParityError):
        shift_double(E(Standard(3, 5)), 0)


@pytest.mark.parametrize("before,after", [((5, 3, 12), (5, 4, 7)), ((4, 2, 9), (4, 3, 5)), ((6, 2, 0), (6, 3, -6))])
def test_transfer_unit(before, after):
    a, b, c = before
    e, step = transfer_unit(E(Standard(a, b), Standard(c, 1)), 0, 1)
    a2, b2, c2 = after
    assert e == E(Standard(a2, b2), Standard(c2, 1))
    assert step.hopf_before == step.hopf_after == 2 * (a * b + c)


@given(st.integers(-50, 50), st.integers(-50, 50), st.integers(-500, 500), st.integers(-3, 3).filter(bool))
def test_transfer_unit_conserves(a, b, c, k):
    e = E(Standard(a, b), Standard(c, 1))
    out, step = transfer_unit(e, 0, 1, k)
    assert ref_hopf(out) == ref_hopf(e)


# ---- represent and absorb ----

@pytest.mark.parametrize("h,terms", [
    (20, [Standard(3, 3), Standard(1, 1)]),
    (0, []),
    (7, [Standard(1, 3), Standard(0, 1), Unit(1)]),
])
def test_represent_hopf_examples(h, terms):
    assert represent_hopf(h) == LinkExpression.of(*terms)


@given(st.integers(-10 ** 9, 10 ** 9))
def test_represent_hopf_property(h):
    e = represent_hopf(h)
    assert ref_hopf(e) == h
    bound = math.isqrt(abs(h)) + 2
    for t in e.terms:
        if isinstance(t.term, Standard):
            assert abs(t.term.a) <= bound and abs(t.term.b) <= bound


def test_absorb_units_examples():
    e, tr = absorb_units(E(U(), U()))
    assert e == E(Standard(1, 1))
    e, _ = absorb_units(LinkExpression((SignedTerm(1, U()), SignedTerm(-1, U()))))
    assert e == LinkExpression()
    e, tr = absorb_units(E(U(), U(), U()))
    assert sorted(map(str, e.terms)) == sorted(map(str, E(Standard(1, 1), U()).terms))
    assert verify_trace(E(U(), U(), U()), tr, e)


@given(st.lists(st.sampled_from([1, -1]), max_size=12))
def test_absorb_units_leaves_one_unit(signs):
    e0 = LinkExpression(tuple(SignedTerm(s, U()) for s in signs))
    e, tr = absorb_units(e0)
    units = [t for t in e.terms if isinstance(t.term, Unit)]
    assert len(units) <= 1 and ref_hopf(e) == ref_hopf(e0)
    assert verify_trace(e0, tr, e)


# ---- balance ----

def test_balance_examples():
    x = E(Standard(16, 1), Standard(0, 1))
    y, tr = balance(x)
    assert y == BalancedLink(4, 4, 0, 0) and y.hopf == 32
    assert verify_trace(x, tr, y.expression())
    same, tr = balance(BalancedLink(4, 4, 0, 0))
    assert same == BalancedLink(4, 4, 0, 0) and len(tr) == 0 and tr.total_cost == 0
    y, tr = balance(E(Standard(9, 2), Standard(3, 1)))
    assert y.is_balanced and y.hopf == 42


def test_balance_rejects():
    with pytest.raises(PreconditionError):
        balance(E(Standard(2, 5), Standard(0, 1)))
    with pytest.raises(PreconditionError):
        balance(E(Standard(3, 1), Standard(25, 1)))


@given(st.integers(1, 10 ** 6).flatmap(lambda a: st.tuples(st.just(a), st.integers(0, a), st.integers(0, 8 * a))),
       st.sampled_from([-1, 0, 1]))
def test_balance_property(abc, eps):
    a, b, c = abc
    terms = [Standard(a, b), Standard(c, 1)] + ([Unit(eps)] if eps else [])
    x = E(*terms)
    y, tr = balance(x)
    assert y.is_balanced and y.hopf == ref_hopf(x)
    assert verify_trace(x, tr, y.expression())


# ---- rebalance, cancel, add ----

def test_rebalance_examples():
    x = BalancedLink(4, 4, 0, 0)
    assert len(rebalance(x, x)) == 0
    tr = rebalance(x, BalancedLink(5, 3, 1, 0))
    assert verify_trace(x.expression(), tr, BalancedLink(5, 3, 1, 0).expression())
    with pytest.raises(HopfMismatch):
        rebalance(x, BalancedLink(4, 4, 1, 0))


def test_cancel_examples():
    x = BalancedLink(3, 2, 1, 0)
    for y in (x, BalancedLink(2, 3, 1, 0)):
        tr = cancel(x, y)
        assert verify_trace(x.expression() + y.expression(-1), tr, LinkExpression())
    with pytest.raises(HopfMismatch):
        cancel(x, BalancedLink(2, 3, 2, 0))


@given(st.integers(-1, 10 ** 8), st.integers(0, 10 ** 6))
def test_cancel_progress_property(h, seed):
    x = balanced_for_hopf(h)
    n = (h - x.eps) // 2
    rng = np.random.default_rng(seed)
    y = x
    if n > 4:
        b = max(1, math.isqrt(n) - int(rng.integers(0, 4)))
        a, c = divmod(n, b)
        if BalancedLink(a, b, c).is_balanced:
            y = BalancedLink(a, b, c, x.eps)
    stats = CancelStats()
    tr = cancel(x, y, stats=stats)
    for before, after, ratio, a2 in stats.rounds:
        if a2 > CostModel().base_threshold:
            assert after <= Fraction(5, 6) * before
            assert ratio <= 3
    assert verify_trace(x.expression() + y.expression(-1), tr, LinkExpression())


def test_add_balanced_examples():
    x, z = BalancedLink(4, 4, 0, 0), BalancedLink(0, 0, 0, 0)
    tr = add_balanced(x, z, x)
    assert verify_trace(x.expression() + z.expression(), tr, x.expression())
    tg = balanced_for_hopf(64)
    assert represent_hopf(64) == LinkExpression.of(Standard(5, 6), Standard(2, 1))
    tr = add_balanced(x, x, tg)
    assert verify_trace(x.expression() + x.expression(), tr, tg.expression())
    with pytest.raises(HopfMismatch):
        add_balanced(x, BalancedLink(5, 3, 1, 0), BalancedLink(1, 1, 0, 0), subtract=True)


@given(st.integers(-1, 10 ** 6), st.integers(-1, 10 ** 6), st.booleans())
def test_add_subtract_property(hx, hy, subtract):
    x, y = balanced_for_hopf(hx), balanced_for_hopf(hy)
    h = hx - hy if subtract else hx + hy
    assume(h >= -1)
    tg = balanced_for_hopf(h)
    tr = add_balanced(x, y, tg, subtract=subtract)
    start = x.expression() + y.expression(-1 if subtract else 1)
    assert verify_trace(start, tr, tg.expression())


# ---- interlocked and twisted ----

def test_split_worked_example():
    t = Interlocked(4, (8,) * 4, (8,) * 4)
    pairs, tr = split_interlocked_step(t, balanced_for_hopf(ref_term_hopf(t)))
    assert len(pairs) == 8
    for p, q in pairs:
        assert p.n == 2 and set(p.a) == set(p.b) == {4}
        assert q.hopf == ref_term_hopf(p)
    assert len(tr) == 1


def test_split_trivial():
    pairs, _ = split_interlocked_step(Interlocked(1, (0,), (0,)), BalancedLink(0, 0, 0))
    assert len(pairs) == 8 and all(ref_term_hopf(p) == 0 and q.is_zero for p, q in pairs)


def test_split_conservation_example():
    t = Interlocked(2, (3, 1), (2, 2))
    pairs, _ = split_interlocked_step(t, balanced_for_hopf(ref_term_hopf(t)))
    pieces = [p for p, _ in pairs]
    assert sum(ref_term_hopf(p) for p in pieces) + 2 * middle_link(t).a * middle_link(t).b == ref_term_hopf(t) == 20


def test_split_mismatch():
    with pytest.raises(HopfMismatch):
        split_interlocked_step(Interlocked(2, (1, 1), (1, 1)), BalancedLink(1, 1, 0, 0))


@st.composite
def interlocked(draw, nmax=9, vmax=40):
    n = draw(st.integers(1, nmax))
    a = tuple(draw(st.lists(st.integers(0, vmax), min_size=n, max_size=n)))
    b = tuple(draw(st.lists(st.integers(0, vmax), min_size=n, max_size=n)))
    return Interlocked(n, a, b)


@given(interlocked())
def test_split_conservation_property(t):
    pieces = split_pieces(t)
    m = (t.n + 1) // 2
    left, right = pieces[:4], pieces[4:]
    # each half is cut into four pieces whose entries sum to twice the half's entries
    for half, a_half, b_half in ((left, t.a[:m], t.b[t.n // 2:]), (right, t.a[m:], t.b[:t.n // 2])):
        if not a_half:
            continue
        assert [sum(p.a[i] for p in half) for i in range(len(a_half))] == [2 * x for x in a_half]
        assert [sum(p.b[i] for p in half) for i in range(len(b_half))] == [2 * x for x in b_half]
    assert {p.n for p in pieces} <= {m, t.n // 2, 1}
    mid = middle_link(t)
    assert sum(ref_term_hopf(p) for p in pieces) + 2 * mid.a * mid.b == ref_term_hopf(t)


def test_interlocked_to_balanced_examples():
    z = Interlocked(1, (0,), (0,))
    tr = interlocked_to_balanced(z, BalancedLink(0, 0, 0))
    assert len(tr) <= 1 and verify_trace(E(z), tr, LinkExpression())
    t = Interlocked(4, (8,) * 4, (8,) * 4)
    tg = balanced_for_hopf(ref_term_hopf(t))
    tr = interlocked_to_balanced(t, tg)
    assert verify_trace(E(t), tr, tg.expression())
    assert tr.total_cost <= 2 * (size(t) + 4)
    t = Interlocked(2, (1, 1), (1, 1))
    tg = balanced_for_hopf(6)
    assert tg.hopf == 6 and tg.is_balanced
    assert verify_trace(E(t), interlocked_to_balanced(t, tg), tg.expression())
    assert not BalancedLink(1, 2, 1, 0).is_balanced


@given(interlocked(nmax=6, vmax=30))
def test_interlocked_to_balanced_property(t):
    tg = balanced_for_hopf(ref_term_hopf(t))
    assert verify_trace(E(t), interlocked_to_balanced(t, tg), tg.expression())


@pytest.mark.parametrize("d", [0, 1, 4, 9, 17])
def test_twisted_to_interlocked(d):
    e, tr = twisted_to_interlocked(Twisted(d))
    assert ref_hopf(e) == d * (d - 1) // 2
    assert verify_trace(E(Twisted(d)), tr, e)
    if d <= 1:
        assert e == LinkExpression()


@pytest.mark.parametrize("d", [0, 4, 5, 30])
def test_twisted_to_balanced(d):
    tg = balanced_for_hopf(d * (d - 1) // 2)
    tr = twisted_to_balanced(Twisted(d), tg)
    assert verify_trace(E(Twisted(d)), tr, tg.expression())
    with pytest.raises(HopfMismatch):
        twisted_to_balanced(Twisted(d), balanced_for_hopf(d * (d - 1) // 2 + 1))


def test_twisted_five_target():
    assert balanced_for_hopf(10) == BalancedLink(2, 2, 1, 0)


# ---- traces ----

def test_verify_trace_basic():
    assert verify_trace(E(Standard(2, 3)), MoveTrace(), E(Standard(2, 3)))
    x = E(Standard(16, 1), Standard(0, 1))
    y, tr = balance(x)
    assert verify_trace(x, tr, y.expression())


def test_verify_trace_tampered_cost():
    x = E(Standard(16, 1), Standard(0, 1))
    y, tr = balance(x)
    k = len(tr) // 2
    steps = list(tr.steps)
    s = steps[k]
    steps[k] = MoveStep(s.move, s.consumed, s.produced, s.cost - 1, s.hopf_before, s.hopf_after, s.params)
    rep = verify_trace(x, MoveTrace(steps), y.expression())
    assert not rep and rep.step == k and rep.check == "c"


def test_verify_trace_wrong_endpoint():
    x = E(Standard(16, 1), Standard(0, 1))
    y, tr = balance(x)
    rep = verify_trace(x, tr, E(Standard(16, 1)))  # same invariant, different terms
    assert not rep and rep.check == "d"
    rep = verify_trace(x, tr, E(Standard(8, 4)))
    assert not rep and rep.check == "b"


def test_trace_json_roundtrip():
    rng = np.random.default_rng(3)
    for x, tr, y in sample_traces(rng, 12):
        back = MoveTrace.from_json(codec.dumps(tr.to_json()) and tr.to_json())
        assert back == tr and back.total_cost == tr.total_cost
        assert verify_trace(x, back, y)


def test_total_cost_is_exact_sum():
    rng = np.random.default_rng(4)
    for _, tr, _ in sample_traces(rng, 12):
        assert tr.total_cost == sum((s.cost for s in tr.steps), Fraction(0))


def test_cost_model_defaults():
    m = CostModel()
    assert (m.kappa, m.c_bal, m.c_cancel, m.base_threshold) == (1, Fraction(7, 2), 12, 64)
    assert m.c_bal >= 1 / (1 - 1 / math.sqrt(2)) and m.c_cancel >= 1 / (1 - math.sqrt(5 / 6))
