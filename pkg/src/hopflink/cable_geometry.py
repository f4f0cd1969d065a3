"""Discretized abstract cables: stripes moving along sampled Lipschitz paths.

A cable of size n and length a is a list of stripes; stripe i is a box
``[0, n_i] x [0, 1]`` translated by ``v_i(alpha)`` for alpha sampled every h.
Coordinates are exact rationals, stored as integer grids over a common
denominator so audits are exact and vectorized.

All audits are at sample resolution: positions are checked at alpha = k*h and
speeds are finite differences between adjacent samples (or frames). Nothing
here certifies the continuous interpolant.
"""
from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .errors import MalformedInput, PreconditionError, SizeMismatch

DEFAULT_K = 4
DEFAULT_V = 1
DEFAULT_H = Fraction(1, 8)
SLACK = Fraction(1, 16)


def _frac(x) -> Fraction:
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x).limit_denominator(1 << 20)
    return Fraction(x)


@dataclass(frozen=True)
class StripeSpec:
    """One stripe: its width and its sampled path ((x, y), ...)."""

    width: int
    path: tuple

    def __post_init__(self):
        if int(self.width) < 1:
            raise PreconditionError("stripe width must be positive")
        object.__setattr__(self, "width", int(self.width))
        object.__setattr__(self, "path", tuple((_frac(x), _frac(y)) for x, y in self.path))


class AbstractCableSpec:
    """Ordered stripes of a cable of size n and length a, sampled every h.

    Internally ``X[i, k], Y[i, k]`` are the corner of stripe i at alpha = k*h,
    in units of ``1/den``.
    """

    def __init__(self, n, a, stripes=(), K=DEFAULT_K, h=DEFAULT_H):
        n, a, h = int(n), _frac(a), _frac(h)
        stripes = [s if isinstance(s, StripeSpec) else StripeSpec(*s) for s in stripes]
        M = _samples(a, h)
        for s in stripes:
            if len(s.path) != M + 1:
                raise SizeMismatch(f"stripe path has {len(s.path)} samples, expected {M + 1}")
        den = 1
        for s in stripes:
            for x, y in s.path:
                den = math.lcm(den, x.denominator, y.denominator)
        X = np.array([[int(x * den) for x, _ in s.path] for s in stripes], dtype=np.int64).reshape(-1, M + 1)
        Y = np.array([[int(y * den) for _, y in s.path] for s in stripes], dtype=np.int64).reshape(-1, M + 1)
        self._init(n, a, K, h, [s.width for s in stripes], den, X, Y)

    def _init(self, n, a, K, h, widths, den, X, Y):
        if n < 1:
            raise PreconditionError("cable size must be positive")
        if int(K) < 2:
            raise PreconditionError("expansion constant K must be at least 2")
        self.n, self.a, self.K, self.h = n, a, int(K), h
        self.widths = tuple(int(w) for w in widths)
        self.den = int(den)
        self.X, self.Y = X, Y
        self.M = _samples(a, h)

    @classmethod
    def from_grid(cls, n, a, widths, den, X, Y, K=DEFAULT_K, h=DEFAULT_H):
        obj = cls.__new__(cls)
        X = np.asarray(X, dtype=np.int64)
        Y = np.asarray(Y, dtype=np.int64)
        obj._init(int(n), _frac(a), K, _frac(h), widths, den, X.reshape(len(widths), -1),
                  Y.reshape(len(widths), -1))
        if obj.X.shape[1] != obj.M + 1 or obj.X.shape != obj.Y.shape:
            raise SizeMismatch("grid does not match the sample count")
        return obj

    @property
    def m(self) -> int:
        return len(self.widths)

    @property
    def stripes(self) -> list:
        out = []
        for i, w in enumerate(self.widths):
            path = [(Fraction(int(x), self.den), Fraction(int(y), self.den))
                    for x, y in zip(self.X[i], self.Y[i])]
            out.append(StripeSpec(w, path))
        return out

    def alpha(self, k: int) -> Fraction:
        return k * self.h

    def section(self, k: int) -> list:
        """Cross-section at sample k as [(width, x, y), ...]."""
        return [(w, Fraction(int(self.X[i, k]), self.den), Fraction(int(self.Y[i, k]), self.den))
                for i, w in enumerate(self.widths)]

    def at_den(self, den: int):
        """(X, Y) rescaled to a multiple ``den`` of the own denominator."""
        if den % self.den:
            raise ValueError("target denominator must be a multiple")
        f = den // self.den
        return self.X * f, self.Y * f

    def same_as(self, other) -> bool:
        if (self.n, self.a, self.h, self.widths) != (other.n, other.a, other.h, other.widths):
            return False
        den = math.lcm(self.den, other.den)
        X1, Y1 = self.at_den(den)
        X2, Y2 = other.at_den(den)
        return bool(np.array_equal(X1, X2) and np.array_equal(Y1, Y2))

    def to_json(self) -> dict:
        return {"n": self.n, "a": str(self.a), "K": self.K, "h": str(self.h),
                "stripes": [{"width": s.width, "path": [[str(x), str(y)] for x, y in s.path]}
                            for s in self.stripes]}

    @classmethod
    def from_json(cls, obj) -> "AbstractCableSpec":
        try:
            stripes = [StripeSpec(s["width"], [(Fraction(x), Fraction(y)) for x, y in s["path"]])
                       for s in obj["stripes"]]
            return cls(obj["n"], Fraction(obj["a"]), stripes, obj.get("K", DEFAULT_K),
                       Fraction(obj.get("h", DEFAULT_H)))
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
            raise MalformedInput(f"bad cable JSON: {exc}") from exc


def _samples(a: Fraction, h: Fraction) -> int:
    if h <= 0 or a < 0:
        raise PreconditionError("need h > 0 and a >= 0")
    M = a / h
    if M.denominator != 1:
        raise PreconditionError(f"length {a} is not a multiple of the sample step {h}")
    return int(M)


def constant_cable(n, a, section, K=DEFAULT_K, h=DEFAULT_H) -> AbstractCableSpec:
    """Cable whose every cross-section is ``section`` = [(width, x, y), ...]."""
    M = _samples(_frac(a), _frac(h))
    return AbstractCableSpec(n, a, [StripeSpec(w, [(x, y)] * (M + 1)) for w, x, y in section], K, h)


def canonical_section(widths, n):
    """Stripes packed left to right into rows of length n, rows stacked upwards."""
    out, x, y = [], 0, 0
    for w in widths:
        if w > n:
            raise PreconditionError(f"stripe of width {w} does not fit a row of length {n}")
        if x + w > n:
            x, y = 0, y + 1
        out.append((w, Fraction(x), Fraction(y)))
        x += w
    if widths and y + 1 > n:
        raise PreconditionError("stripes do not fit into the end face")
    return out


# -- validation -----------------------------------------------------------------

@dataclass
class CableReport:
    ok: bool
    check: Optional[str] = None  # "count", "lipschitz", "box", "ends", "disjoint", "order"
    stripes: tuple = ()
    alpha: Optional[Fraction] = None
    message: str = ""
    max_speed: float = 0.0

    def __bool__(self):
        return self.ok


def _speed_sq_ok(dx, dy, den, h: Fraction, limit: Fraction):
    # |(dx, dy)| / (den*h) <= limit  <=>  (dx^2 + dy^2) q^2 s^2 <= r^2 den^2 p^2,
    # decided in floats away from the limit and in exact integers near it
    p, q = h.numerator, h.denominator
    r, s = limit.numerator, limit.denominator
    approx = np.hypot(dx.astype(float), dy.astype(float)) / (den * float(h))
    ok = approx <= float(limit) * (1 - 1e-9)
    for i, k in np.argwhere(~ok):
        x, y = int(dx[i, k]), int(dy[i, k])
        ok[i, k] = (x * x + y * y) * (q * q * s * s) <= (r * den * p) ** 2
    return ok


def sampled_speeds(c: AbstractCableSpec) -> np.ndarray:
    """Finite-difference speeds |dv/dalpha| per stripe and sample step (floats, for reports)."""
    if c.M == 0 or c.m == 0:
        return np.zeros((c.m, 0))
    dx = np.diff(c.X, axis=1).astype(float)
    dy = np.diff(c.Y, axis=1).astype(float)
    return np.hypot(dx, dy) / (c.den * float(c.h))


def validate_cable(c: AbstractCableSpec, V=DEFAULT_V, slack=SLACK) -> CableReport:
    """Check the count, Lipschitz, box, end, disjointness and order conditions.

    ``V`` is the sampled speed limit. Two stripes collide when their wire
    regions (boxes inset by ``slack``) share interior points.
    """
    V, slack = _frac(V), _frac(slack)
    n, K, den, m = c.n, c.K, c.den, c.m
    speeds = sampled_speeds(c)
    top = float(speeds.max()) if speeds.size else 0.0

    def bad(check, k, ij, msg):
        return CableReport(False, check, ij, c.alpha(int(k)) if k is not None else None, msg, top)

    if m > K * n:
        return bad("count", None, (), f"{m} stripes exceed K*n = {K * n}")
    if speeds.size:
        ok = _speed_sq_ok(np.diff(c.X, axis=1), np.diff(c.Y, axis=1), den, c.h, V)
        if not ok.all():
            i, k = map(int, np.argwhere(~ok)[0])
            return bad("lipschitz", k, (i,), f"stripe {i} moves faster than {V}")
    W = np.array(c.widths, dtype=np.int64)[:, None] * den
    big = K * n * den
    box_bad = (c.X < 0) | (c.Y < 0) | (c.X + W > big) | (c.Y + den > big)
    if box_bad.any():
        i, k = _first(box_bad)
        return bad("box", k, (i,), f"stripe {i} leaves [0, {K * n}]^2")
    small = n * den
    for k in (0, c.M):
        col = (c.X[:, k] < 0) | (c.Y[:, k] < 0) | (c.X[:, k] + W[:, 0] > small) | (c.Y[:, k] + den > small)
        if col.any():
            i = int(np.argmax(col))
            return bad("ends", k, (i,), f"stripe {i} ends outside [0, {n}]^2")
    if m < 2:
        return CableReport(True, max_speed=top)
    iu, ju = np.triu_indices(m, 1)
    Xi, Xj, Yi, Yj = c.X[iu], c.X[ju], c.Y[iu], c.Y[ju]
    ov_x = np.minimum(Xi + W[iu], Xj + W[ju]) - np.maximum(Xi, Xj)
    ov_y = den - np.abs(Yi - Yj)
    # overlap > 2*slack (in units of 1/den), compared in integers
    sn, sd = slack.numerator, slack.denominator
    collide = (ov_x * sd > 2 * sn * den) & (ov_y * sd > 2 * sn * den)
    if collide.any():
        p, k = _first(collide)
        ij = (int(iu[p]), int(ju[p]))
        return bad("disjoint", k, ij, f"stripes {ij} overlap")
    order_ok = (Yi + den <= Yj) | ((Xi <= Xj) & (Yi <= Yj))
    if not order_ok.all():
        p, k = _first(~order_ok)
        ij = (int(iu[p]), int(ju[p]))
        return bad("order", k, ij, f"stripes {ij} are out of order")
    return CableReport(True, max_speed=top)


def _first(mask):
    """(row, sample) of the earliest violation, smallest row first among ties."""
    k = int(np.argmax(mask.any(axis=0)))
    i = int(np.argmax(mask[:, k]))
    return i, k


# -- homotopies -----------------------------------------------------------------

@dataclass
class CableHomotopy:
    frames: list
    dt: Fraction = DEFAULT_H
    phases: list = field(default_factory=list)  # (name, first frame, last frame)

    def velocity_report(self) -> dict:
        """Maximal sampled speeds along alpha (within frames) and along time (between frames)."""
        along = max((float(sampled_speeds(f).max(initial=0.0)) for f in self.frames), default=0.0)
        across = 0.0
        for f, g in zip(self.frames, self.frames[1:]):
            den = math.lcm(f.den, g.den)
            X1, Y1 = f.at_den(den)
            X2, Y2 = g.at_den(den)
            d = np.hypot((X2 - X1).astype(float), (Y2 - Y1).astype(float)).max(initial=0.0)
            across = max(across, float(d) / (den * float(self.dt)))
        return {"alpha_speed": along, "time_speed": across, "frames": len(self.frames)}

    def to_json(self) -> dict:
        return {"dt": str(self.dt), "phases": [list(p) for p in self.phases],
                "frames": [f.to_json() for f in self.frames], "velocity": self.velocity_report()}

    def write_csv(self, path) -> None:
        """One row per stripe per sample per frame, for plotting elsewhere."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["frame", "stripe", "sample", "alpha", "width", "x", "y"])
            for t, f in enumerate(self.frames):
                for i, wd in enumerate(f.widths):
                    for k in range(f.M + 1):
                        w.writerow([t, i, k, str(f.alpha(k)), wd, str(Fraction(int(f.X[i, k]), f.den)),
                                    str(Fraction(int(f.Y[i, k]), f.den))])


@dataclass
class AuditReport:
    ok: bool
    frames: int
    failures: list  # (frame index, CableReport)
    alpha_speed: float
    time_speed: float
    limit: Fraction
    endpoints_exact: Optional[bool] = None
    note: str = "audited at sample resolution only"

    def __bool__(self):
        return self.ok


def speed_limit(V=DEFAULT_V, K=DEFAULT_K) -> Fraction:
    return 2 * _frac(V) + 4 * int(K)


def audit_homotopy(hom: CableHomotopy, V=DEFAULT_V, workers: int = 1, start=None, end=None) -> AuditReport:
    """Validate every frame against the speed limit 2V + 4K and check both kinds of speed."""
    if not hom.frames:
        raise PreconditionError("empty homotopy")
    limit = speed_limit(V, hom.frames[0].K)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            reports = list(pool.map(lambda f: validate_cable(f, limit), hom.frames))
    else:
        reports = [validate_cable(f, limit) for f in hom.frames]
    failures = [(t, r) for t, r in enumerate(reports) if not r.ok]
    vel = hom.velocity_report()
    exact = None
    if start is not None and end is not None:
        exact = hom.frames[0].same_as(start) and hom.frames[-1].same_as(end)
    ok = not failures and vel["time_speed"] <= float(limit) + 1e-12 and exact is not False
    return AuditReport(ok, len(hom.frames), failures, vel["alpha_speed"], vel["time_speed"], limit, exact)


def _frame(c, den, X, Y):
    return AbstractCableSpec.from_grid(c.n, c.a, c.widths, den, X, Y, c.K, c.h)


def _reparam_frames(c: AbstractCableSpec, stride: int = 2):
    """Discrete 2-Lipschitz reparametrization making c constant near both ends.

    psi_t(k) = k + clip(psi_1(k) - k, -t, t) with psi_1 collapsing the first
    and last quarter; every frame only shows samples of c, so it stays valid.
    """
    M = c.M
    q1 = M // 4
    k = np.arange(M + 1)
    psi1 = np.clip(2 * (k - q1), 0, M)
    g = psi1 - k
    frames = []
    top = int(np.abs(g).max(initial=0))
    for t in range(0, top + stride, stride):
        psi = k + np.clip(g, -t, t)
        frames.append((c.X[:, psi], c.Y[:, psi]))
        if t >= top:
            break
    return frames, q1


def _ramp(M, q1):
    """Weight 0 at the ends rising linearly to 1 on the middle, as (num, den)."""
    if q1 == 0:
        return np.ones(M + 1, dtype=np.int64), 1
    k = np.arange(M + 1)
    num = np.minimum(np.minimum(k, M - k), q1)
    return num.astype(np.int64), q1


def _drag_frames(X, Y, den, M, q1, steps):
    """Drag second coordinates toward the stripe index on the middle part."""
    mu, mden = _ramp(M, q1)
    m = X.shape[0]
    target = (np.arange(m, dtype=np.int64) * den)[:, None]
    D = den * mden * steps
    out = []
    for j in range(steps + 1):
        # y + (j/steps) * mu * (target - y), over the common denominator D
        Yn = Y * mden * steps + j * mu[None, :] * (target - Y)
        out.append((X * mden * steps, Yn, D))
    return out


def _blend_frames(X1, X2, Y, den, steps):
    out = []
    for j in range(steps + 1):
        out.append(((steps - j) * X1 + j * X2, Y * steps, den * steps))
    return out


def comb(c1: AbstractCableSpec, c2: AbstractCableSpec, stride: int = 2) -> CableHomotopy:
    """Homotopy through cables from c1 to c2, constant on the ends.

    Phases: reparametrize both cables to be constant on the outer quarters,
    drag the second coordinates to the stripe index, blend first coordinates,
    then undo the drag and reparametrization on c2's side.
    """
    if (c1.n, c1.a, c1.h, c1.K) != (c2.n, c2.a, c2.h, c2.K):
        raise PreconditionError("cables differ in size, length, step or K")
    if c1.widths != c2.widths:
        raise PreconditionError("cables have different stripes")
    if c1.a < c1.n:
        raise PreconditionError(f"length {c1.a} is shorter than size {c1.n}")
    den = math.lcm(c1.den, c2.den)
    X1, Y1 = c1.at_den(den)
    X2, Y2 = c2.at_den(den)
    if not (np.array_equal(X1[:, [0, -1]], X2[:, [0, -1]]) and np.array_equal(Y1[:, [0, -1]], Y2[:, [0, -1]])):
        raise PreconditionError("cables have different ends")
    g1 = AbstractCableSpec.from_grid(c1.n, c1.a, c1.widths, den, X1, Y1, c1.K, c1.h)
    g2 = AbstractCableSpec.from_grid(c2.n, c2.a, c2.widths, den, X2, Y2, c2.K, c2.h)
    r1, q1 = _reparam_frames(g1, stride)
    r2, _ = _reparam_frames(g2, stride)
    steps = max(1, int(c1.n / c1.h) // 2)  # drag and blend take time n/2 each
    d1 = _drag_frames(*r1[-1], den, c1.M, q1, steps)
    d2 = _drag_frames(*r2[-1], den, c1.M, q1, steps)
    Xa, Ya, Da = d1[-1]
    Xb, Yb, Db = d2[-1]
    assert Da == Db and np.array_equal(Ya, Yb)
    blend = _blend_frames(Xa, Xb, Ya, Da, steps)

    grids = [(X, Y, den) for X, Y in r1] + d1[1:] + blend[1:] + d2[::-1][1:] + [(X, Y, den) for X, Y in r2[::-1][1:]]
    frames = [_frame(c1, *_reduce(D, X, Y)) for X, Y, D in grids]
    a, b = len(r1), len(r1) + len(d1) - 1
    c, d = b + len(blend) - 1, b + len(blend) - 1 + len(d2) - 1
    phases = [("reparametrize", 0, a - 1), ("drag", a - 1, b - 1), ("blend", b - 1, c - 1),
              ("undrag", c - 1, d - 1), ("unreparametrize", d - 1, len(frames) - 1)]
    return CableHomotopy(frames, c1.h, phases)


def _reduce(D, X, Y):
    g = math.gcd(int(D), int(np.gcd.reduce(X, axis=None)) if X.size else 0,
                 int(np.gcd.reduce(Y, axis=None)) if Y.size else 0)
    g = max(g, 1)
    return D // g, X // g, Y // g


def _sorted_section(section, n):
    sec = sorted(((_frac(x), _frac(y), int(w)) for w, x, y in section), key=lambda t: (t[1], t[0]))
    for x, y, w in sec:
        if x < 0 or y < 0 or x + w > n or y + 1 > n:
            raise PreconditionError("cross-section stripe outside [0, n]^2")
    for (x1, y1, w1), (x2, y2, w2) in zip(sec, sec[1:]):
        if not (y1 + 1 <= y2 or (x1 + w1 <= x2 and y1 <= y2)):
            raise PreconditionError("cross-section stripes overlap or are not in row order")
    return sec


def reshape(start, end, n, K=DEFAULT_K, h=DEFAULT_H) -> AbstractCableSpec:
    """Cable of length T = 4n with cross-section ``start`` at 0 and ``end`` at T.

    Sections are [(width, x, y), ...]; stripes are matched in row order
    (bottom row first, left to right), so widths must agree in that order.
    The path: frozen for n/2, drag rows to the stripe index over n, move
    first coordinates over n, drag back over n, frozen for n/2.
    """
    n, h = int(n), _frac(h)
    s, e = _sorted_section(start, n), _sorted_section(end, n)
    if [w for *_, w in s] != [w for *_, w in e]:
        raise PreconditionError("start and end widths differ in row order")
    m = len(s)
    if m > K * n:
        raise PreconditionError(f"{m} stripes exceed K*n = {K * n}")
    T = 4 * n
    M = _samples(Fraction(T), h)
    q = M // 8  # n/2 in samples
    L = M // 4  # n in samples
    den = 1
    for x, y, _ in s + e:
        den = math.lcm(den, x.denominator, y.denominator)
    D = den * L
    xs = np.array([int(x * den) for x, _, _ in s], dtype=np.int64)[:, None]
    ys = np.array([int(y * den) for _, y, _ in s], dtype=np.int64)[:, None]
    xe = np.array([int(x * den) for x, _, _ in e], dtype=np.int64)[:, None]
    ye = np.array([int(y * den) for _, y, _ in e], dtype=np.int64)[:, None]
    rows = (np.arange(m, dtype=np.int64) * den)[:, None]
    k = np.arange(M + 1)
    # weights in units of 1/L
    up = np.clip(k - q, 0, L)[None, :]
    mid = np.clip(k - q - L, 0, L)[None, :]
    down = np.clip(k - q - 2 * L, 0, L)[None, :]
    X = xs * L + mid * (xe - xs)
    Y = ys * L + up * (rows - ys) + down * (ye - rows)
    widths = [w for *_, w in s]
    den, X, Y = _reduce(D, X.reshape(m, -1), Y.reshape(m, -1))
    return AbstractCableSpec.from_grid(n, T, widths, den, X, Y, K=K, h=h)


# -- striping -------------------------------------------------------------------

@dataclass(frozen=True)
class Stripe:
    """Wires start..stop-1, in row ``row_start`` on one face and ``row_end`` on the other."""

    start: int
    stop: int
    row_start: int
    row_end: int

    @property
    def width(self) -> int:
        return self.stop - self.start


def greedy_striping(start_rows, end_rows, L: Optional[int] = None) -> list:
    """Group consecutive wires into stripes whenever both face rows agree."""
    start_rows, end_rows = list(start_rows), list(end_rows)
    if len(start_rows) != len(end_rows):
        raise SizeMismatch(f"{len(start_rows)} wires on one face, {len(end_rows)} on the other")
    if L is not None:
        for rows in (start_rows, end_rows):
            counts = np.bincount(np.asarray(rows, dtype=np.int64), minlength=1) if rows else np.zeros(1)
            if rows and (min(rows) < 0 or max(rows) >= L or counts.max() > L):
                raise SizeMismatch(f"row assignment does not fit an {L}-face")
    out = []
    for w, key in enumerate(zip(start_rows, end_rows)):
        if out and (out[-1].row_start, out[-1].row_end) == key and out[-1].stop == w:
            last = out[-1]
            out[-1] = Stripe(last.start, w + 1, last.row_start, last.row_end)
        else:
            out.append(Stripe(w, w + 1, *key))
    return out


def row_major_cells(offset: int, count: int, L: int):
    """(row, col) of ``count`` consecutive unit cells from ``offset`` in an L x L face."""
    if offset < 0 or offset + count > L * L:
        raise SizeMismatch("cells run past the face")
    return [divmod(offset + w, L) for w in range(count)]


def stripes_to_sections(stripes, start_cells, end_cells):
    """Start and end cross-sections [(width, x, y)] for a striping of cell-placed wires."""
    s = [(st.width, Fraction(start_cells[st.start][1]), Fraction(start_cells[st.start][0])) for st in stripes]
    e = [(st.width, Fraction(end_cells[st.start][1]), Fraction(end_cells[st.start][0])) for st in stripes]
    return s, e


def dump_json(obj, path=None) -> str:
    text = json.dumps(obj.to_json(), indent=1, sort_keys=True)
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def random_cable(rng, n, a, widths=None, K=DEFAULT_K, h=DEFAULT_H, step=Fraction(1, 16)) -> AbstractCableSpec:
    """Random valid cable whose two ends are the canonical section of ``widths``.

    Stripes take a rejection-sampled random walk (moves of ``step`` per
    coordinate, so speeds stay below 1/sqrt(2) per unit step 1/8) for half
    the length and retrace it, so both ends agree.
    """
    a, h, step = _frac(a), _frac(h), _frac(step)
    if widths is None:
        widths = [int(rng.integers(1, n + 1)) for _ in range(int(rng.integers(1, n + 1)))]
    sec = canonical_section(list(widths), n)
    M = _samples(a, h)
    den = step.denominator
    for _, x, y in sec:
        den = math.lcm(den, x.denominator, y.denominator)
    st = int(step * den)
    m = len(sec)
    x = np.array([int(x * den) for _, x, _ in sec], dtype=np.int64)
    y = np.array([int(y * den) for _, _, y in sec], dtype=np.int64)
    W = np.array([w for w, _, _ in sec], dtype=np.int64) * den
    big = K * n * den
    half = M // 2
    xs, ys = [x.copy()], [y.copy()]
    for _ in range(half):
        for i in rng.permutation(m):
            dx, dy = (int(v) * st for v in rng.integers(-1, 2, size=2))
            nx, ny = x[i] + dx, y[i] + dy
            if nx < 0 or ny < 0 or nx + W[i] > big or ny + den > big:
                continue
            if _fits(i, nx, ny, x, y, W, den):
                x[i], y[i] = nx, ny
        xs.append(x.copy())
        ys.append(y.copy())
    cols_x = xs + [xs[k] for k in range(M - half - 1, -1, -1)]
    cols_y = ys + [ys[k] for k in range(M - half - 1, -1, -1)]
    X = np.stack(cols_x, axis=1)
    Y = np.stack(cols_y, axis=1)
    return AbstractCableSpec.from_grid(n, a, [w for w, _, _ in sec], den, X, Y, K, h)


def _fits(i, nx, ny, x, y, W, den):
    for j in range(len(x)):
        if j == i:
            continue
        lo, hi = (i, j) if i < j else (j, i)
        xl, yl = (nx, ny) if lo == i else (x[lo], y[lo])
        xh, yh = (nx, ny) if hi == i else (x[hi], y[hi])
        if not (yl + den <= yh or (xl + W[lo] <= xh and yl <= yh)):
            return False
        ov_x = min(xl + W[lo], xh + W[hi]) - max(xl, xh)
        if ov_x > 0 and den - abs(yl - yh) > 0:
            return False
    return True


def random_section(rng, widths, n):
    """Random valid cross-section in [0, n]^2 with the given widths in row order.

    Rows get random integer gaps; returns None when the widths do not fit.
    """
    widths = list(widths)
    for _ in range(20):
        out, x, y = [], 0, 0
        for w in widths:
            gap = int(rng.integers(0, 3))
            if x + gap + w > n or (out and rng.random() < 0.3):
                x, y = 0, y + 1 + int(rng.integers(0, 2))
                gap = int(rng.integers(0, n - w + 1))
            out.append((w, Fraction(x + gap), Fraction(y)))
            x += gap + w
        if y + 1 <= n:
            return out
    return None
