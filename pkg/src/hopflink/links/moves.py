"""Elementary homotopy moves of the link calculus.

Each move is registered with a pure ``apply`` (consumed terms + params to
produced terms) and a cost rule, so a recorded step can be replayed and
re-priced independently of the code that produced it.
"""
from __future__ import annotations

from fractions import Fraction

from ..errors import MismatchedMove, MoveError, ParityError
from . import codec
from .terms import (Interlocked, LinkExpression, SignedTerm, Standard, Twisted, Unit,
                    hopf_invariant, size, term_size)
from .trace import CostModel, MoveStep, make_step, register


def involved_cost(consumed, params, model: CostModel) -> Fraction:
    return model.kappa * size(consumed)


def _standard(st: SignedTerm, what="term"):
    if not isinstance(st.term, Standard):
        raise MismatchedMove(f"{what} must be a standard link, got {st.term}")
    return st.sign, st.term.a, st.term.b


def _arity(consumed, n, move):
    if len(consumed) != n:
        raise MoveError(f"{move} consumes exactly {n} terms")


@register("merge_parallel", involved_cost)
def _merge_parallel(consumed, params, model):
    _arity(consumed, 2, "merge_parallel")
    s1, a1, b1 = _standard(consumed[0])
    s2, a2, b2 = _standard(consumed[1])
    if b1 != b2:
        raise MismatchedMove(f"second degrees differ ({b1} vs {b2})")
    if s1 != s2:
        raise MismatchedMove("cannot merge terms of opposite sign")
    return (SignedTerm(s1, Standard(a1 + a2, b1)),)


@register("split_parallel", involved_cost, ("first",))
def _split_parallel(consumed, params, model):
    _arity(consumed, 1, "split_parallel")
    s, a, b = _standard(consumed[0])
    first = int(params["first"])
    return (SignedTerm(s, Standard(first, b)), SignedTerm(s, Standard(a - first, b)))


@register("shift_double", involved_cost, ("inverse",))
def _shift_double(consumed, params, model):
    _arity(consumed, 1, "shift_double")
    s, a, b = _standard(consumed[0])
    if params.get("inverse"):
        if b % 2:
            raise ParityError(f"second degree {b} is odd")
        return (SignedTerm(s, Standard(2 * a, b // 2)),)
    if a % 2:
        raise ParityError(f"first degree {a} is odd")
    return (SignedTerm(s, Standard(a // 2, 2 * b)),)


@register("transpose", involved_cost)
def _transpose(consumed, params, model):
    _arity(consumed, 1, "transpose")
    s, a, b = _standard(consumed[0])
    return (SignedTerm(s, Standard(b, a)),)


@register("transfer_unit", involved_cost, ("k",))
def _transfer_unit(consumed, params, model):
    # a|b + c|1  ->  a|(b+k) + (c-ka)|1
    _arity(consumed, 2, "transfer_unit")
    s1, a, b = _standard(consumed[0])
    s2, c, one = _standard(consumed[1])
    if one != 1:
        raise MismatchedMove("second term must have the form c|1")
    if s1 != s2:
        raise MismatchedMove("terms must carry the same sign")
    k = int(params.get("k", 1))
    if k == 0:
        raise MoveError("transfer count must be nonzero")
    return (SignedTerm(s1, Standard(a, b + k)), SignedTerm(s1, Standard(c - k * a, 1)))


@register("peel", involved_cost, ("k",))
def _peel(consumed, params, model):
    # a|b + c|1  ->  (a-k)|b + (c+kb)|1, the odd-degree fix
    _arity(consumed, 2, "peel")
    s1, a, b = _standard(consumed[0])
    s2, c, one = _standard(consumed[1])
    if one != 1 or s1 != s2:
        raise MismatchedMove("peel needs a|b + c|1 of one sign")
    k = int(params.get("k", 1))
    if k == 0:
        raise MoveError("peel count must be nonzero")
    return (SignedTerm(s1, Standard(a - k, b)), SignedTerm(s1, Standard(c + k * b, 1)))


def halving_round_degrees(a: int, b: int, c: int):
    """One round of the balancing loop on a|b + c|1.

    Odd a is fixed by peeling 1|b into c|1, then a|b -> (a/2)|2b, then c is
    pushed back below a by transfers, and roles swap if a fell below b.
    """
    if a <= 2 * b or b < 0 or c < 0:
        raise MoveError("halving round needs a > 2b >= 0 and c >= 0")
    if a % 2:
        a, c = a - 1, c + b
    a, b = a // 2, 2 * b
    if a > 0 and c > a:
        k = (c - 1) // a
        b, c = b + k, c - k * a
    if a < b:
        a, b = b, a
    return a, b, c


def shift_unit_degrees(a: int, b: int, c: int):
    """Move one unit of degree from a to b through the c|1 reservoir."""
    if a <= 0 or b < 0 or c < 0:
        raise MoveError("shift_unit needs a > 0 and b, c >= 0")
    a, c = a - 1, c + b
    if a > 0 and c > a:
        k = (c - 1) // a
        b, c = b + k, c - k * a
    return a, b, c


@register("shift_unit", involved_cost)
def _shift_unit(consumed, params, model):
    _arity(consumed, 2, "shift_unit")
    s1, a, b = _standard(consumed[0])
    s2, c, one = _standard(consumed[1])
    if one != 1 or s1 != s2:
        raise MismatchedMove("shift_unit needs a|b + c|1 of one sign")
    a, b, c = shift_unit_degrees(a, b, c)
    return (SignedTerm(s1, Standard(a, b)), SignedTerm(s1, Standard(c, 1)))


@register("halving_round", involved_cost)
def _halving_round(consumed, params, model):
    _arity(consumed, 2, "halving_round")
    s1, a, b = _standard(consumed[0])
    s2, c, one = _standard(consumed[1])
    if one != 1 or s1 != s2:
        raise MismatchedMove("halving round needs a|b + c|1 of one sign")
    a, b, c = halving_round_degrees(a, b, c)
    return (SignedTerm(s1, Standard(a, b)), SignedTerm(s1, Standard(c, 1)))


@register("reshape_null", involved_cost)
def _reshape_null(consumed, params, model):
    _arity(consumed, 1, "reshape_null")
    s, a, b = _standard(consumed[0])
    if a * b != 0:
        raise MoveError("only a link with a zero degree is null")
    return (SignedTerm(s, Standard(0, 1)),)


@register("absorb_units", involved_cost)
def _absorb_units(consumed, params, model):
    _arity(consumed, 2, "absorb_units")
    values = []
    for st in consumed:
        if not isinstance(st.term, Unit) or st.term.eps == 0:
            raise MismatchedMove("absorb_units consumes two nonzero unit loops")
        values.append(st.sign * st.term.eps)
    if values[0] != values[1]:
        raise MismatchedMove("unit loops of opposite sign cancel, they do not merge")
    return (SignedTerm(values[0], Standard(1, 1)),)


@register("cancel_pair", involved_cost)
def _cancel_pair(consumed, params, model):
    _arity(consumed, 2, "cancel_pair")
    x, y = consumed
    if x.term != y.term or x.sign != -y.sign:
        if isinstance(x.term, Unit) and isinstance(y.term, Unit) and \
                x.sign * x.term.eps == -y.sign * y.term.eps:
            return ()
        raise MismatchedMove("cancel_pair needs a term and its negative")
    return ()


def _insert_cost(consumed, params, model):
    return model.kappa * size(codec.terms_from_json(params["terms"]))


@register("insert_pair", _insert_cost, ("terms",))
def _insert_pair(consumed, params, model):
    if consumed:
        raise MoveError("insert_pair consumes nothing")
    x = codec.terms_from_json(params["terms"])
    return tuple(t.negated() for t in x) + x


@register("split_cancel", involved_cost)
def _split_cancel(consumed, params, model):
    # a1|b1 - a2|b2  ->  (a1 - b2/2)|b1 - (a2 - b1/2)|b2; the middle pair
    # (b2/2)|b1 - b2|(b1/2) dies by shift_double and cancellation.
    _arity(consumed, 2, "split_cancel")
    s1, a1, b1 = _standard(consumed[0])
    s2, a2, b2 = _standard(consumed[1])
    if s1 != -s2:
        raise MismatchedMove("split_cancel needs opposite signs")
    if b1 % 2 or b2 % 2:
        raise ParityError("split_cancel needs even second degrees")
    return (SignedTerm(s1, Standard(a1 - b2 // 2, b1)), SignedTerm(s2, Standard(a2 - b1 // 2, b2)))


@register("create_null", lambda consumed, params, model: model.kappa, ("sign",))
def _create_null(consumed, params, model):
    # the null link 0|1 is a constant map; it appears from nothing
    if consumed:
        raise MoveError("create_null consumes nothing")
    sign = int(params.get("sign", 1))
    if sign not in (1, -1):
        raise MoveError("sign must be +1 or -1")
    return (SignedTerm(sign, Standard(0, 1)),)


def groups_of(consumed, params):
    lengths = [int(x) for x in params["groups"]]
    if sum(lengths) != len(consumed) or min(lengths, default=1) < 1:
        raise MoveError("group lengths do not partition the consumed terms")
    out, k = [], 0
    for n in lengths:
        out.append(consumed[k:k + n])
        k += n
    return out


def degree_bound(st: SignedTerm) -> int:
    t = st.term
    if isinstance(t, Standard):
        return max(abs(t.a), abs(t.b))
    if isinstance(t, Unit):
        return 1
    if isinstance(t, Twisted):
        return t.d
    return max(max(t.a), max(t.b), t.n)


def _certificate_cost(consumed, params, model):
    return model.kappa * max(size(g) for g in groups_of(consumed, params))


@register("null_certificate", _certificate_cost, ("groups", "measure"))
def _null_certificate(consumed, params, model):
    """Finite-table null-homotopy: every group has Hopf 0 and is below the bound."""
    measure = params.get("measure", "degree")
    bound = model.base_threshold if measure == "degree" else model.small_size
    for g in groups_of(consumed, params):
        if hopf_invariant(g) != 0:
            raise MoveError("certificate group carries nonzero Hopf invariant")
        if measure == "degree":
            big = max(degree_bound(t) for t in g)
        elif measure == "size":
            big = max(term_size(t.term) for t in g)
        else:
            raise MoveError(f"unknown certificate measure {measure!r}")
        if big >= bound:
            raise MoveError(f"certificate group exceeds the table bound {bound}")
    return ()


# -- expression-level wrappers -------------------------------------------------

def _apply_at(e: LinkExpression, indices, move, params=None, model=None):
    consumed = tuple(e.terms[i] for i in indices)
    step = make_step(move, consumed, params, model)
    return e.replace(indices, step.produced), step


def merge_parallel(e: LinkExpression, i: int, j: int, model=None):
    """a1|b + a2|b  ->  (a1+a2)|b."""
    return _apply_at(e, (i, j), "merge_parallel", model=model)


def shift_double(e: LinkExpression, i: int, inverse: bool = False, model=None):
    """2a|b -> a|2b (or back with ``inverse``)."""
    return _apply_at(e, (i,), "shift_double", {"inverse": True} if inverse else None, model)


def transfer_unit(e: LinkExpression, i: int, j: int, k: int = 1, model=None):
    """a|b + c|1 -> a|(b+k) + (c-ka)|1; k = -1 runs the move backwards."""
    return _apply_at(e, (i, j), "transfer_unit", {"k": k}, model)


def absorb_units(e: LinkExpression, model=None):
    """Pair up same-sign unit loops into 1|1 terms, then cancel opposite ones."""
    from .trace import MoveTrace
    trace = MoveTrace()
    while True:
        units = [(k, t.sign * t.term.eps) for k, t in enumerate(e.terms)
                 if isinstance(t.term, Unit) and t.term.eps]
        plus = [k for k, v in units if v > 0]
        minus = [k for k, v in units if v < 0]
        if len(plus) >= 2 or len(minus) >= 2:
            pick, move = (plus if len(plus) >= 2 else minus)[:2], "absorb_units"
        elif plus and minus:
            pick, move = [plus[0], minus[0]], "cancel_pair"
        else:
            return e, trace
        e, step = _apply_at(e, sorted(pick), move, model=model)
        trace.append(step)
