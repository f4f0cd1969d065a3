"""Independent linking oracle for closed 3-d polylines.

Each polyline is a wire loop carrying a multiplicity. Projecting along a
fixed direction, every crossing between strands of loops i and j adds its
sign to 2*lk(i, j) and every self-crossing of loop i adds to its writhe,
which is the framing of a wire whose disk keeps a fixed orientation. The
total Hopf invariant is then the sum over crossings of sign * m_i * m_j.

All arithmetic is exact: points become Fractions and the projection is the
shear (x, y, z) -> (x + p*z, y + q*z) with small rational p, q, retried from
a fixed sequence until the diagram is generic.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..errors import DegenerateProjection, PreconditionError

# deterministic shear directions tried in order
SHEARS = [(Fraction(1, 97), Fraction(1, 89)), (Fraction(2, 83), Fraction(-1, 79)),
          (Fraction(-3, 73), Fraction(2, 71)), (Fraction(1, 61), Fraction(3, 59)),
          (Fraction(-2, 53), Fraction(-3, 47)), (Fraction(5, 43), Fraction(1, 41)),
          (Fraction(-1, 37), Fraction(4, 31)), (Fraction(3, 29), Fraction(-5, 23))]


@dataclass
class LinkingResult:
    lk: np.ndarray  # pairwise linking numbers (object array of Fractions; integers for closed loops)
    writhe: list  # per loop
    hopf: int
    crossings: int
    shear: tuple

    @property
    def lk_int(self):
        return np.array([[int(x) for x in row] for row in self.lk], dtype=np.int64)


def _points(poly):
    pts = [tuple(Fraction(c) for c in p) for p in poly]
    if len(pts) < 3:
        raise PreconditionError("a closed polyline needs at least three vertices")
    if pts[0] == pts[-1]:
        pts = pts[:-1]
    return pts


def _segments(pts):
    return [(pts[k], pts[(k + 1) % len(pts)]) for k in range(len(pts))]


class _Degenerate(Exception):
    pass


def _cross(s, t, p, q):
    """Signed crossing of segment s over/under t in the sheared projection, or 0."""
    (a0, a1), (b0, b1) = s, t
    P = lambda v: (v[0] + p * v[2], v[1] + q * v[2])
    A0, A1, B0, B1 = P(a0), P(a1), P(b0), P(b1)
    dA = (A1[0] - A0[0], A1[1] - A0[1])
    dB = (B1[0] - B0[0], B1[1] - B0[1])
    den = dA[0] * dB[1] - dA[1] * dB[0]
    w = (B0[0] - A0[0], B0[1] - A0[1])
    if den == 0:
        # parallel: degenerate only if collinear and overlapping
        if w[0] * dA[1] - w[1] * dA[0] == 0:
            dot = lambda u: u[0] * dA[0] + u[1] * dA[1]
            L = dot(dA)
            t0 = dot((B0[0] - A0[0], B0[1] - A0[1]))
            t1 = dot((B1[0] - A0[0], B1[1] - A0[1]))
            if L == 0 or (max(t0, t1) >= 0 and min(t0, t1) <= L):
                raise _Degenerate("collinear overlap")
        return 0
    u = (w[0] * dB[1] - w[1] * dB[0]) / den
    v = (w[0] * dA[1] - w[1] * dA[0]) / den
    if not (0 <= u <= 1 and 0 <= v <= 1):
        return 0
    if u in (0, 1) or v in (0, 1):
        raise _Degenerate("crossing at a vertex")
    za = a0[2] + u * (a1[2] - a0[2])
    zb = b0[2] + v * (b1[2] - b0[2])
    if za == zb:
        raise _Degenerate("polylines meet in space")
    # sign: right-hand rule of (over direction, under direction)
    if za > zb:
        over, under = dA, dB
    else:
        over, under = dB, dA
    c = over[0] * under[1] - over[1] * under[0]
    return 1 if c > 0 else -1


def _adjacent(k, l, n):
    return k == l or (k + 1) % n == l or (l + 1) % n == k


def linking_oracle(wires, multiplicities=None) -> LinkingResult:
    """Linking matrix, writhes and total Hopf invariant of weighted wire loops."""
    loops = [_segments(_points(w)) for w in wires]
    m = [1] * len(loops) if multiplicities is None else [int(x) for x in multiplicities]
    if len(m) != len(loops):
        raise PreconditionError("one multiplicity per wire")
    last = None
    for p, q in SHEARS:
        try:
            return _count(loops, m, p, q)
        except _Degenerate as exc:
            last = exc
    raise DegenerateProjection(f"no generic projection after {len(SHEARS)} tries ({last})")


def _count(loops, m, p, q):
    n = len(loops)
    twice = [[0] * n for _ in range(n)]
    writhe = [0] * n
    total = 0
    crossings = 0
    boxes = [_bbox(lp, p, q) for lp in loops]
    for i in range(n):
        for j in range(i, n):
            for k, s in enumerate(loops[i]):
                bs = boxes[i][k]
                for l, t in enumerate(loops[j]):
                    if i == j and (l <= k or _adjacent(k, l, len(loops[i]))):
                        continue
                    bt = boxes[j][l]
                    if bs[0] > bt[2] or bt[0] > bs[2] or bs[1] > bt[3] or bt[1] > bs[3]:
                        continue
                    c = _cross(s, t, p, q)
                    if c:
                        crossings += 1
                        total += c * m[i] * m[j]
                        if i == j:
                            writhe[i] += c
                        else:
                            twice[i][j] += c
                            twice[j][i] += c
    lk = np.empty((n, n), dtype=object)
    for i in range(n):
        for j in range(n):
            lk[i, j] = Fraction(twice[i][j], 2) if i != j else Fraction(0)
    return LinkingResult(lk, writhe, total, crossings, (p, q))


def _bbox(loop, p, q):
    out = []
    for a, b in loop:
        xs = (a[0] + p * a[2], b[0] + p * b[2])
        ys = (a[1] + q * a[2], b[1] + q * b[2])
        out.append((min(xs), min(ys), max(xs), max(ys)))
    return out


# -- polyline realizations of the basic links --------------------------------------

def _circle(center, r, k=16, plane="xy"):
    import math
    cx, cy, cz = center
    pts = []
    for t in range(k):
        a = 2 * math.pi * t / k
        u, v = r * math.cos(a), r * math.sin(a)
        if plane == "xy":
            pts.append((cx + u, cy + v, cz))
        elif plane == "xz":
            pts.append((cx + u, cy, cz + v))
        else:
            pts.append((cx, cy + u, cz + v))
    return [tuple(Fraction(c).limit_denominator(1 << 16) for c in pt) for pt in pts]


def hopf_pair(a: int, b: int):
    """Two linked round loops carrying multiplicities a and b (invariant 2ab)."""
    A = _circle((0, 0, 0), 2, plane="xy")
    B = _circle((2, 0, 0), 2, plane="xz")
    if linking_oracle([A, B]).lk[0, 1] < 0:
        B = B[::-1]
    return [A, B], [a, b]


def unlinked_pair():
    return [_circle((0, 0, 0), 1), _circle((5, 0, 0), 1)], [1, 1]


def twisted_loops(d: int, radius=20, steps=64):
    """Degree-d loop cable whose cross-section turns by half a revolution.

    Wires sit on a centrally symmetric line; each keeps its own orientation,
    so the framing is the vertical one the oracle measures.
    """
    import math
    if d < 1:
        raise PreconditionError("twisted cable needs d >= 1")
    xs = [k - (d - 1) / 2 for k in range(d)]
    sigma = [d - 1 - k for k in range(d)]
    seen, loops = set(), []
    for start in range(d):
        if start in seen:
            continue
        pts, k, lap = [], start, 0
        while True:
            seen.add(k)
            for t in range(steps):
                phi = 2 * math.pi * t / steps
                rot = math.pi * t / steps  # half turn per lap
                u = xs[k] * math.cos(rot)
                w = xs[k] * math.sin(rot)
                R = radius + u
                pts.append((R * math.cos(phi), R * math.sin(phi), -w))  # right-handed
            k = sigma[k]
            lap += 1
            if k == start:
                break
        loops.append([tuple(Fraction(c).limit_denominator(1 << 20) for c in pt) for pt in pts])
    return loops, [1] * len(loops)


def swap_loops(d1: int, d2: int, radius=20, steps=64):
    """Loop cable whose first d1 wires and last d2 wires exchange places.

    The d2-block slides over the d1-block on the first quarter of each lap;
    every wire pair from different blocks crosses once per lap.
    """
    import math
    d = d1 + d2
    sigma = [p + d2 if p < d1 else p - d1 for p in range(d)]
    seen, loops = set(), []
    for start in range(d):
        if start in seen:
            continue
        pts, p = [], start
        while True:
            seen.add(p)
            q = sigma[p]
            for t in range(steps):
                phi = 2 * math.pi * t / steps
                f = min(1.0, 4 * t / steps)
                off = p + f * (q - p)
                lift = -math.sin(math.pi * f) if p >= d1 else 0.0  # right-handed
                R = radius + off
                pts.append((R * math.cos(phi), R * math.sin(phi), lift))
            p = q
            if p == start:
                break
        loops.append([tuple(Fraction(c).limit_denominator(1 << 20) for c in pt) for pt in pts])
    return loops, [1] * len(loops)
