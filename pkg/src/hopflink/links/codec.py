"""Canonical JSON encoding of link terms, expressions and balanced links."""
from __future__ import annotations

import json
from fractions import Fraction

from ..errors import MalformedInput
from .terms import (BalancedLink, Interlocked, LinkExpression, SignedTerm, Standard, Twisted,
                    Unit)


def term_to_json(t) -> dict:
    if isinstance(t, Standard):
        return {"Standard": {"a": t.a, "b": t.b}}
    if isinstance(t, Unit):
        return {"Unit": {"eps": t.eps}}
    if isinstance(t, Twisted):
        return {"Twisted": {"d": t.d}}
    if isinstance(t, Interlocked):
        return {"Interlocked": {"n": t.n, "a": list(t.a), "b": list(t.b)}}
    raise TypeError(f"not a link term: {t!r}")


def term_from_json(obj):
    try:
        (tag, body), = obj.items()
        if tag == "Standard":
            return Standard(int(body["a"]), int(body["b"]))
        if tag == "Unit":
            return Unit(int(body["eps"]))
        if tag == "Twisted":
            return Twisted(int(body["d"]))
        if tag == "Interlocked":
            return Interlocked(int(body["n"]), tuple(body["a"]), tuple(body["b"]))
    except (AttributeError, KeyError, TypeError, ValueError) as exc:
        raise MalformedInput(f"bad link term {obj!r}: {exc}") from exc
    raise MalformedInput(f"unknown link term tag in {obj!r}")


def signed_to_json(st: SignedTerm) -> dict:
    return {"sign": st.sign, "term": term_to_json(st.term)}


def signed_from_json(obj) -> SignedTerm:
    try:
        return SignedTerm(int(obj["sign"]), term_from_json(obj["term"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedInput(f"bad signed term {obj!r}: {exc}") from exc


def terms_to_json(terms) -> list:
    return [signed_to_json(t) for t in terms]


def terms_from_json(items) -> tuple:
    if not isinstance(items, list):
        raise MalformedInput("expected a list of signed terms")
    return tuple(signed_from_json(x) for x in items)


def expression_to_json(e: LinkExpression) -> dict:
    return {"terms": terms_to_json(e.terms)}


def expression_from_json(obj) -> LinkExpression:
    if not isinstance(obj, dict) or "terms" not in obj:
        raise MalformedInput("expression JSON needs a 'terms' list")
    return LinkExpression(terms_from_json(obj["terms"]))


def balanced_to_json(x: BalancedLink) -> dict:
    return {"a": x.a, "b": x.b, "c": x.c, "eps": x.eps}


def balanced_from_json(obj) -> BalancedLink:
    try:
        return BalancedLink(int(obj["a"]), int(obj["b"]), int(obj["c"]), int(obj.get("eps", 0)))
    except (AttributeError, KeyError, TypeError, ValueError) as exc:
        raise MalformedInput(f"bad balanced link {obj!r}: {exc}") from exc


def fraction_to_str(q: Fraction) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def fraction_from_str(s) -> Fraction:
    try:
        return Fraction(s)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise MalformedInput(f"bad rational {s!r}") from exc


def dumps(obj) -> str:
    """Canonical text form: sorted keys, no whitespace variance."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))
