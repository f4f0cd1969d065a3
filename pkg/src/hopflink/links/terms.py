"""Link terms, signed sums of them, and their Hopf invariants and sizes."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import isqrt
from typing import Iterable, Union


def ceil_sqrt(n: int) -> int:
    n = abs(n)
    return 0 if n == 0 else isqrt(n - 1) + 1


@dataclass(frozen=True, order=True)
class Standard:
    """The Hopf link ``a|b`` of two cables of degrees a and b."""

    a: int
    b: int

    def __str__(self):
        return f"{self.a}|{self.b}"


@dataclass(frozen=True, order=True)
class Unit:
    """The unit-Hopf loop with multiplicity eps in {-1, 0, 1}."""

    eps: int = 1

    def __post_init__(self):
        if self.eps not in (-1, 0, 1):
            raise ValueError(f"unit multiplicity must be -1, 0 or 1, got {self.eps}")

    def __str__(self):
        return {1: "1~", -1: "-1~", 0: "0~"}[self.eps]


@dataclass(frozen=True, order=True)
class Twisted:
    """A degree-d loop cable with half a Dehn twist."""

    d: int

    def __post_init__(self):
        if self.d < 0:
            raise ValueError("twisted link degree must be nonnegative")

    def __str__(self):
        return f"_{self.d}_"


@dataclass(frozen=True, order=True)
class Interlocked:
    """Interlocked link: stripe i of A links stripe j of B iff i + j > n."""

    n: int
    a: tuple
    b: tuple

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(int(x) for x in self.a))
        object.__setattr__(self, "b", tuple(int(x) for x in self.b))
        if self.n < 1:
            raise ValueError("interlocked link needs n >= 1")
        if len(self.a) != self.n or len(self.b) != self.n:
            raise ValueError("interlocked sequences must have exactly n entries")
        if min(self.a) < 0 or min(self.b) < 0:
            raise ValueError("interlocked entries must be nonnegative")

    def __str__(self):
        return f"{list(self.a)}|{self.n}{list(self.b)}"


LinkTerm = Union[Standard, Unit, Twisted, Interlocked]


@dataclass(frozen=True, order=True)
class SignedTerm:
    sign: int
    term: LinkTerm

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")

    def negated(self) -> "SignedTerm":
        return SignedTerm(-self.sign, self.term)

    def __str__(self):
        return ("+" if self.sign > 0 else "-") + str(self.term)


def pos(term: LinkTerm) -> SignedTerm:
    return SignedTerm(1, term)


def neg(term: LinkTerm) -> SignedTerm:
    return SignedTerm(-1, term)


@dataclass(frozen=True)
class LinkExpression:
    """Ordered formal sum of signed link terms."""

    terms: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))

    @classmethod
    def of(cls, *items) -> "LinkExpression":
        """Build from LinkTerms (taken with sign +1) or SignedTerms."""
        return cls(tuple(t if isinstance(t, SignedTerm) else pos(t) for t in items))

    def __add__(self, other: "LinkExpression") -> "LinkExpression":
        return LinkExpression(self.terms + other.terms)

    def __neg__(self) -> "LinkExpression":
        return LinkExpression(tuple(t.negated() for t in self.terms))

    def __sub__(self, other: "LinkExpression") -> "LinkExpression":
        return self + (-other)

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def __getitem__(self, i):
        return self.terms[i]

    def replace(self, indices, new_terms) -> "LinkExpression":
        """Drop the terms at ``indices`` and put ``new_terms`` where the first one was."""
        indices = sorted(set(indices))
        out = []
        for k, t in enumerate(self.terms):
            if k == indices[0]:
                out.extend(new_terms)
            if k not in indices:
                out.append(t)
        return LinkExpression(tuple(out))

    def __str__(self):
        return " ".join(str(t) for t in self.terms) if self.terms else "0"


@lru_cache(maxsize=1 << 16)
def term_hopf(t: LinkTerm) -> int:
    if isinstance(t, Standard):
        return 2 * t.a * t.b
    if isinstance(t, Unit):
        return t.eps
    if isinstance(t, Twisted):
        return t.d * (t.d - 1) // 2
    if isinstance(t, Interlocked):
        # suffix sums of b: pairs (i, j) with j > n - i
        total = 0
        suffix = 0
        n = t.n
        # walk i from 1..n, the admissible j range grows from {n} downwards
        for i in range(1, n + 1):
            suffix += t.b[n - i]
            total += t.a[i - 1] * suffix
        return 2 * total
    raise TypeError(f"not a link term: {t!r}")


def hopf_invariant(e) -> int:
    """Hopf invariant of a term, signed term, or expression."""
    if isinstance(e, SignedTerm):
        return e.sign * term_hopf(e.term)
    if isinstance(e, (LinkExpression, tuple, list)):
        return sum(hopf_invariant(t) for t in e)
    return term_hopf(e)


@lru_cache(maxsize=1 << 16)
def term_size(t: LinkTerm) -> int:
    if isinstance(t, Standard):
        return ceil_sqrt(max(abs(t.a), abs(t.b)))
    if isinstance(t, Unit):
        return 1
    if isinstance(t, Twisted):
        return ceil_sqrt(t.d)
    if isinstance(t, Interlocked):
        return max(max(t.a), max(t.b), t.n)
    raise TypeError(f"not a link term: {t!r}")


def size(e) -> int:
    """Linear size of a term or expression.

    An expression pays ``ceil(log2(1 + #terms))`` on top of its largest term
    for packing its summands side by side.
    """
    if isinstance(e, SignedTerm):
        return term_size(e.term)
    if isinstance(e, (LinkExpression, tuple, list)):
        terms = list(e)
        if not terms:
            return 0
        return max(size(t) for t in terms) + len(terms).bit_length()
    return term_size(e)


def as_terms(items: Iterable) -> tuple:
    return tuple(t if isinstance(t, SignedTerm) else pos(t) for t in items)


@dataclass(frozen=True, order=True)
class BalancedLink:
    """The expression ``a|b + c|1 + eps*1~``.

    Construction only checks signs; ``is_balanced`` tells whether the link is
    in normal form (2b >= a >= b, a >= c, or all degrees zero).
    """

    a: int
    b: int
    c: int
    eps: int = 0

    def __post_init__(self):
        if min(self.a, self.b, self.c) < 0:
            raise ValueError("balanced link degrees must be nonnegative")
        if self.eps not in (-1, 0, 1):
            raise ValueError("eps must be -1, 0 or 1")

    @property
    def is_zero(self) -> bool:
        return self.a == self.b == self.c == 0

    @property
    def is_balanced(self) -> bool:
        if self.is_zero:
            return True
        return 2 * self.b >= self.a >= self.b and self.a >= self.c

    @property
    def hopf(self) -> int:
        return 2 * (self.a * self.b + self.c) + self.eps

    @property
    def size(self) -> int:
        return ceil_sqrt(self.a)

    def terms(self, sign: int = 1) -> tuple:
        out = []
        if not self.is_zero:
            out = [SignedTerm(sign, Standard(self.a, self.b)), SignedTerm(sign, Standard(self.c, 1))]
        if self.eps:
            out.append(SignedTerm(sign, Unit(self.eps)))
        return tuple(out)

    def expression(self, sign: int = 1) -> LinkExpression:
        return LinkExpression(self.terms(sign))

    def __str__(self):
        s = f"{self.a}|{self.b}+{self.c}|1"
        return s + (f"+({self.eps})~" if self.eps else "")


def balanced_for_hopf(h: int) -> BalancedLink:
    """Canonical balanced link with Hopf invariant ``h`` (h >= -1)."""
    if h < -1:
        raise ValueError("a balanced link carries Hopf invariant >= -1")
    eps = -1 if h == -1 else h % 2
    n = (h - eps) // 2
    if n == 0:
        return BalancedLink(0, 0, 0, eps)
    b = isqrt(n)
    a = min(2 * b, n // b)
    c = n - a * b
    link = BalancedLink(a, b, c, eps)
    assert link.is_balanced and link.hopf == h
    return link
