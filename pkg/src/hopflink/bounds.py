"""Closed-form cost ceilings and the flux lower bound, in exact rational arithmetic.

Square roots enter as ``Sqrt(x, coef)`` = coef * sqrt(x) and are replaced by
rational enclosures, refined until the final quantity is pinned down to 2^-10.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import isqrt

from .errors import InsufficientData, RatioOutOfRange

WIDTH = Fraction(1, 1 << 10)


@dataclass(frozen=True)
class Sqrt:
    x: Fraction
    coef: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "x", Fraction(self.x))
        object.__setattr__(self, "coef", Fraction(self.coef))
        if self.x < 0:
            raise ValueError("square root of a negative number")

    def square(self) -> Fraction:
        """(coef * sqrt x)^2 with the sign of coef."""
        return self.coef * abs(self.coef) * self.x

    def enclosure(self, bits: int):
        """lo <= value <= hi with hi - lo <= |coef| * 2^-bits."""
        p, q = self.x.numerator, self.x.denominator
        scale = 1 << bits
        r = isqrt(p * q * scale * scale)
        lo = Fraction(r, q * scale)
        hi = lo if r * r == p * q * scale * scale else Fraction(r + 1, q * scale)
        lo, hi = self.coef * lo, self.coef * hi
        return (lo, hi) if lo <= hi else (hi, lo)


def _enclose(v, bits):
    if isinstance(v, Sqrt):
        return v.enclosure(bits)
    v = Fraction(v)
    return v, v


def _sign_vs_one(r) -> int:
    """Sign of r - 1 for positive r, decided exactly."""
    v = r.square() if isinstance(r, Sqrt) else Fraction(r)
    return (v > 1) - (v < 1)


def _positive(r) -> bool:
    if isinstance(r, Sqrt):
        return r.coef > 0 and r.x > 0
    return Fraction(r) > 0


@dataclass(frozen=True)
class SeriesBound:
    first_term: object
    ratio: object
    closed_form: Fraction  # exact sum, or a rational upper bound within 2^-10 of it
    lower: Fraction
    exact: bool

    def __le__(self, other):
        return self.closed_form <= other


def series_ceiling(first_term, ratio) -> SeriesBound:
    """first/(1 - ratio): the sum of the geometric series first * ratio^k, k >= 0."""
    if not _positive(ratio) or _sign_vs_one(ratio) >= 0:
        raise RatioOutOfRange(f"ratio {ratio} is not in (0, 1)")
    if not isinstance(first_term, Sqrt) and not isinstance(ratio, Sqrt):
        v = Fraction(first_term) / (1 - Fraction(ratio))
        return SeriesBound(first_term, ratio, v, v, True)
    bits = 12
    while True:
        flo, fhi = _enclose(first_term, bits)
        rlo, rhi = _enclose(ratio, bits)
        if rhi < 1:
            cands = [f / (1 - r) for f in (flo, fhi) for r in (rlo, rhi)]
            lo, hi = min(cands), max(cands)
            if hi - lo <= WIDTH:
                return SeriesBound(first_term, ratio, hi, lo, lo == hi)
        bits += 4


@dataclass(frozen=True)
class LowerBoundQuery:
    L: int
    n: int
    C: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "C", Fraction(self.C))
        if self.n < 1 or self.L < 1 or self.C <= 0:
            raise ValueError("need L >= 1, n >= 1 and C > 0")


@dataclass(frozen=True)
class LowerBound:
    length: Fraction  # minimal homotopy length
    total_degree: int  # L^n
    flux: Fraction  # degree that can pass per unit of time, C * L^(n-1)


def lower_bound_length(q: LowerBoundQuery) -> LowerBound:
    """Moving degree L^n through a flux budget of C L^(n-1) per unit time takes time L/C."""
    deg = q.L ** q.n
    flux = q.C * q.L ** (q.n - 1)
    return LowerBound(Fraction(deg) / flux, deg, flux)


@dataclass
class ScalingVerdict:
    accept: bool
    C_total: Fraction
    ratios: list = field(default_factory=list)
    reason: str = ""

    def __bool__(self):
        return self.accept


def verify_linear_scaling(reports, lo=Fraction(3, 2), hi=Fraction(5, 2)) -> ScalingVerdict:
    """Accept costs growing like 2^N: successive ratios in [lo, hi]; C_total = max cost / 2^N.

    ``reports`` holds PlanReports (or (N, cost) pairs) for N = 2..k, k >= 4.
    """
    pts = []
    for r in reports:
        N, cost = (r.N, r.total_cost) if hasattr(r, "total_cost") else r
        pts.append((int(N), Fraction(cost)))
    pts.sort()
    Ns = [p[0] for p in pts]
    if len(pts) < 3 or Ns[-1] < 4 or Ns != list(range(Ns[0], Ns[0] + len(Ns))):
        raise InsufficientData("need consecutive ladder sizes N = 2..k with k >= 4")
    C = max(c / 2 ** N for N, c in pts)
    if all(c == 0 for _, c in pts):
        return ScalingVerdict(True, C, [], "all costs zero")
    ratios = [(b / a if a else None) for (_, a), (_, b) in zip(pts, pts[1:])]
    bad = [i for i, r in enumerate(ratios) if r is None or not lo <= r <= hi]
    if bad:
        i = bad[0]
        return ScalingVerdict(False, C, ratios, f"ratio cost(N={Ns[i + 1]})/cost(N={Ns[i]}) = {ratios[i]}")
    return ScalingVerdict(True, C, ratios, "")
