"""Cubical maps: integer face degrees on a grid plus one signed balanced link per cell.

The grid at level l has G = 2^(N-l) cells per axis, each of side s = 2^l.
A face is keyed by (axis, x, y, z): the face normal to ``axis`` at the low
corner (x, y, z), so its coordinate along ``axis`` runs over 0..G. Degrees
count flux in the positive axis direction; only nonzero entries are stored.
Inside a cell the flux is routed by the fixed template (one cable per ordered
pair of faces), which fixes the Hopf invariant carried by the cables.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from ..errors import MalformedInput, PreconditionError
from ..links.terms import BalancedLink, balanced_for_hopf, ceil_sqrt
from .templates import CABLE_ID, default_table

C_DEG = 2


@dataclass(frozen=True)
class CellLink:
    """``sign * link``; coarse cells may need a negative invariant."""

    link: BalancedLink
    sign: int = 1

    @classmethod
    def for_hopf(cls, h: int) -> "CellLink":
        if h >= -1:
            return cls(balanced_for_hopf(h), 1)
        return cls(balanced_for_hopf(-h), -1)

    @property
    def hopf(self) -> int:
        return self.sign * self.link.hopf

    @property
    def size(self) -> int:
        return ceil_sqrt(self.link.a)

    @property
    def is_trivial(self) -> bool:
        return self.link.is_zero and not self.link.eps

    def terms(self):
        return self.link.terms(self.sign)

    def to_json(self) -> dict:
        out = {"a": self.link.a, "b": self.link.b, "c": self.link.c, "eps": self.link.eps}
        if self.sign != 1:
            out["sign"] = self.sign
        return out

    @classmethod
    def from_json(cls, obj) -> "CellLink":
        return cls(BalancedLink(int(obj["a"]), int(obj["b"]), int(obj["c"]), int(obj.get("eps", 0))),
                   int(obj.get("sign", 1)))


def cell_face(cell, f: int):
    """Grid-face key of face f = 2*axis + side of ``cell``."""
    axis, side = divmod(f, 2)
    c = list(cell)
    c[axis] += side
    return (axis, *c)


@dataclass
class CubicalMap:
    N: int
    level: int = 0
    faces: dict = field(default_factory=dict)  # (axis, x, y, z) -> nonzero degree
    cells: dict = field(default_factory=dict)  # (x, y, z) -> CellLink
    hopf_total: int = 0

    @property
    def scale(self) -> int:
        return 2 ** self.level

    @property
    def G(self) -> int:
        return 2 ** (self.N - self.level)

    def degree(self, key) -> int:
        return self.faces.get(tuple(key), 0)

    def inflows(self, cell) -> tuple:
        """Signed flux into the cell through its six faces (sums to 0 when closed)."""
        x, y, z = cell
        g = self.faces.get
        return (g((0, x, y, z), 0), -g((0, x + 1, y, z), 0), g((1, x, y, z), 0), -g((1, x, y + 1, z), 0),
                g((2, x, y, z), 0), -g((2, x, y, z + 1), 0))

    def link(self, cell) -> CellLink:
        return self.cells.get(tuple(cell), ZERO_LINK)

    def active_cells(self):
        """Cells touching a nonzero face or holding a nontrivial link."""
        out = set(k for k, v in self.cells.items() if not v.is_trivial)
        G = self.G
        for (axis, x, y, z), d in self.faces.items():
            if not d:
                continue
            if (x if axis == 0 else y if axis == 1 else z) < G:
                out.add((x, y, z))
            lo = (x - (axis == 0), y - (axis == 1), z - (axis == 2))
            if min(lo) >= 0:
                out.add(lo)
        return sorted(out)

    @property
    def is_zero(self) -> bool:
        return not any(self.faces.values()) and all(v.is_trivial for v in self.cells.values())

    def computed_hopf(self, table=None) -> int:
        return sum(cable_hopf(self.inflows(c), table) + self.link(c).hopf for c in self.active_cells())

    def to_json(self) -> dict:
        return {"N": self.N, "level": self.level,
                "faces": [[*k, d] for k, d in sorted(self.faces.items()) if d],
                "cells": [[*k, v.to_json()] for k, v in sorted(self.cells.items()) if not v.is_trivial],
                "hopf_total": self.hopf_total}

    @classmethod
    def from_json(cls, obj) -> "CubicalMap":
        try:
            faces = {tuple(int(x) for x in row[:4]): int(row[4]) for row in obj.get("faces", [])}
            cells = {tuple(int(x) for x in row[:3]): CellLink.from_json(row[3]) for row in obj.get("cells", [])}
            return cls(int(obj["N"]), int(obj.get("level", 0)), {k: d for k, d in faces.items() if d},
                       cells, int(obj["hopf_total"]))
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            raise MalformedInput(f"bad cubical map: {exc}") from exc

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


ZERO_LINK = CellLink(BalancedLink(0, 0, 0, 0))


def zero_map(N: int, level: int = 0) -> CubicalMap:
    return CubicalMap(N, level)


@dataclass
class MapReport:
    ok: bool
    check: str = ""
    where: tuple = ()
    message: str = ""

    def __bool__(self):
        return self.ok


def validate_map(m: CubicalMap, c_deg: int = C_DEG, table=None) -> MapReport:
    """Check boundary, closure, degree bound, link fit and the stored Hopf total."""
    if not 0 <= m.level <= m.N:
        return MapReport(False, "shape", (), f"level {m.level} outside 0..{m.N}")
    G, s = m.G, m.scale
    for key, d in sorted(m.faces.items()):
        axis, *c = key
        if axis not in (0, 1, 2) or not all(0 <= c[a] <= (G if a == axis else G - 1) for a in range(3)):
            return MapReport(False, "shape", key, "face outside the grid")
        if d and c[axis] in (0, G):
            return MapReport(False, "boundary", key, f"boundary face carries degree {d}")
    for key in sorted(m.cells):
        if not all(0 <= x < G for x in key):
            return MapReport(False, "shape", key, "cell outside the grid")
    for cell in m.active_cells():
        if sum(m.inflows(cell)):
            return MapReport(False, "closure", cell, f"face degrees sum to {sum(m.inflows(cell))}")
    bound = c_deg * s * s
    for key, d in sorted(m.faces.items()):
        if abs(d) > bound:
            return MapReport(False, "degree", key, f"|{d}| > {bound}")
    for key, v in sorted(m.cells.items()):
        if 2 * v.size > s:
            return MapReport(False, "fit", key, f"link size {v.size} exceeds s/2 = {s / 2}")
    h = m.computed_hopf(table)
    if h != m.hopf_total:
        return MapReport(False, "hopf", (), f"stored Hopf total {m.hopf_total}, cells carry {h}")
    return MapReport(True)


def assign_cable_degrees(inflows, table=None) -> np.ndarray:
    """Greedy routing: each source face sends its surplus to the first sinks with room."""
    inflows = [int(x) for x in inflows]
    if len(inflows) != 6 or sum(inflows):
        raise PreconditionError("need six face degrees summing to zero")
    need = [max(-x, 0) for x in inflows]
    d = np.zeros(30, dtype=np.int64)
    for f in range(6):
        left = inflows[f]
        for g in range(6):
            if left <= 0:
                break
            take = min(left, need[g])
            if take and g != f:
                d[CABLE_ID[(f, g)]] += take
                need[g] -= take
                left -= take
        assert left <= 0, "closure holds, so every surplus finds a sink"
    return d


def wire_ranges(inflows, table=None, degrees=None) -> dict:
    """Per face: [(cable, lo, hi)] in template order, wires numbered 1..|degree|.

    Empty cables get ``hi = lo - 1``. Faces with positive inflow list their
    outgoing cables, the others their incoming ones.
    """
    table = table or default_table()
    if degrees is None:
        degrees = assign_cable_degrees(inflows, table)
    out = {}
    for f in range(6):
        pos = 1
        rows = []
        for c in table.cables_on_face(f, outgoing=inflows[f] > 0):
            d = int(degrees[c])
            rows.append((c, pos, pos + d - 1))
            pos += d
        assert pos - 1 == abs(inflows[f])
        out[f] = rows
    return out


@lru_cache(maxsize=1 << 16)
def _cable_hopf(inflows, digest):
    table = _TABLES[digest]
    d = assign_cable_degrees(inflows, table).astype(object)
    if not d.any():
        return 0
    lam = table.lam.astype(object)
    tau = [int(t) for t in table.tau]
    return int(d @ lam @ d) + sum(twist_hopf(t, int(x)) for t, x in zip(tau, d))


_TABLES = {}


def cable_hopf(inflows, table=None) -> int:
    """Hopf invariant of the template cables of one cell with these inflows."""
    table = table or default_table()
    _TABLES.setdefault(table.digest, table)
    return _cable_hopf(tuple(int(x) for x in inflows), table.digest)


def twist_hopf(tau: int, d: int) -> int:
    """Invariant of a degree-d cable turned by tau half-turns: d^2 per full turn, d(d-1)/2 per half."""
    s = 1 if tau >= 0 else -1
    full, half = divmod(abs(tau), 2)
    return s * (full * d * d + half * d * (d - 1) // 2)


# ---- coarsening of the data (no homotopy) ----

def block_cells(coarse_cell):
    X, Y, Z = coarse_cell
    return [(2 * X + i, 2 * Y + j, 2 * Z + k) for i in (0, 1) for j in (0, 1) for k in (0, 1)]


def coarse_faces(m: CubicalMap) -> dict:
    """Sum the four sub-faces under each coarse face."""
    out = {}
    for (axis, *c), d in m.faces.items():
        if c[axis] % 2:
            continue  # interior to a coarse cell
        key = [axis] + [x // 2 for x in c]
        key = tuple(key)
        out[key] = out.get(key, 0) + d
    return {k: d for k, d in out.items() if d}


def coarse_map(m: CubicalMap, table=None) -> CubicalMap:
    """Coarse degrees and links chosen so that every 2x2x2 block keeps its invariant."""
    if m.level >= m.N:
        raise PreconditionError("map is already at the top level")
    cm = CubicalMap(m.N, m.level + 1, coarse_faces(m), {}, m.hopf_total)
    blocks = sorted(set(tuple(x // 2 for x in c) for c in m.active_cells()))
    for B in blocks:
        fine = sum(cable_hopf(m.inflows(c), table) + m.link(c).hopf for c in block_cells(B))
        h = fine - cable_hopf(cm.inflows(B), table)
        if h:
            cm.cells[B] = CellLink.for_hopf(h)
    return cm


# ---- random instances ----

def _loop_cells(axes, fixed, x0, x1, y0, y1):
    """Cells of a rectangle boundary in the plane of ``axes``, in cyclic order."""
    a1, a2 = axes
    pts = ([(x, y0) for x in range(x0, x1)] + [(x1, y) for y in range(y0, y1)]
           + [(x, y1) for x in range(x1, x0, -1)] + [(x0, y) for y in range(y1, y0, -1)])
    cells = []
    for u, v in pts:
        c = list(fixed)
        c[a1], c[a2] = u, v
        cells.append(tuple(c))
    return cells


def add_loop(faces: dict, cells, d: int) -> None:
    """Push degree d around a closed cycle of adjacent cells."""
    for p, q in zip(cells, cells[1:] + cells[:1]):
        diff = [b - a for a, b in zip(p, q)]
        axis = next(i for i in range(3) if diff[i])
        key = list(max(p, q, key=lambda c: c[axis]))
        key = (axis, *key)
        faces[key] = faces.get(key, 0) + d * diff[axis]
        if not faces[key]:
            del faces[key]


class MapBuilder:
    """Grows a scale-1 map while keeping every level of its coarsening valid.

    The coarse link of a cell at any level is the total invariant of the
    scale-1 cells below it minus its own cable invariant (the block sums
    telescope), so adding a loop or a unit only touches its ancestors.
    """

    def __init__(self, N: int, c_deg: int = C_DEG, table=None):
        self.N, self.c_deg, self.table = N, c_deg, table or default_table()
        self.faces = [dict() for _ in range(N + 1)]  # per level
        self.weight = [dict() for _ in range(N + 1)]  # per level: sum of scale-1 invariants below
        self.units = {}
        self._digest = self.table.digest
        _TABLES.setdefault(self._digest, self.table)

    def _inflows(self, level, cell):
        x, y, z = cell
        g = self.faces[level].get
        return (g((0, x, y, z), 0), -g((0, x + 1, y, z), 0), g((1, x, y, z), 0), -g((1, x, y + 1, z), 0),
                g((2, x, y, z), 0), -g((2, x, y, z + 1), 0))

    def _leaf_hopf(self, cell):
        return _cable_hopf(self._inflows(0, cell), self._digest) + self.units.get(cell, 0)

    def _ok(self, level, cell):
        h = self.weight[level].get(cell, 0) - _cable_hopf(self._inflows(level, cell), self._digest)
        if level == 0:
            return h == self.units.get(cell, 0)
        return 2 * CellLink.for_hopf(h).size <= 2 ** level

    def _apply(self, face_deltas, leaves_before, change):
        """Apply face deltas and a leaf change; return the touched cells per level."""
        old = {c: self._leaf_hopf(c) for c in leaves_before}
        for (axis, *c), d in face_deltas.items():
            for level in range(self.N + 1):
                if c[axis] % 2 ** level:
                    break
                key = (axis,) + tuple(x >> level for x in c)
                f = self.faces[level]
                f[key] = f.get(key, 0) + d
                if not f[key]:
                    del f[key]
        change()
        touched = [set() for _ in range(self.N + 1)]
        for c in leaves_before:
            delta = self._leaf_hopf(c) - old[c]
            for level in range(self.N + 1):
                key = tuple(x >> level for x in c)
                touched[level].add(key)
                if delta:
                    w = self.weight[level]
                    w[key] = w.get(key, 0) + delta
        # every changed face lies between two consecutive loop cells, so the
        # ancestors of the leaves already cover all cells whose inflows moved
        return touched

    def _valid(self, touched):
        # scale-1 weights are the leaf invariants themselves, so only coarser levels can fail
        for level, cells in enumerate(touched):
            if level == 0:
                continue
            for cell in cells:
                if not self._ok(level, cell):
                    return False
        return True

    def try_loop(self, cells, d: int) -> bool:
        deltas = {}
        add_loop(deltas, cells, d)
        G = 2 ** self.N
        for (axis, *c), v in deltas.items():
            if c[axis] in (0, G) or abs(self.faces[0].get((axis, *c), 0) + v) > self.c_deg:
                return False
        leaves = set(cells)
        touched = self._apply(deltas, leaves, lambda: None)
        if self._valid(touched):
            return True
        self._apply({k: -v for k, v in deltas.items()}, leaves, lambda: None)
        return False

    def try_unit(self, cell, eps: int) -> bool:
        """Add eps to the unit count of a scale-1 cell (each cell holds -1, 0 or 1)."""
        cur = self.units.get(cell, 0)
        if cur + eps not in (-1, 0, 1):
            return False

        def set_to(v):
            def go():
                if v:
                    self.units[cell] = v
                else:
                    self.units.pop(cell, None)
            return go

        touched = self._apply({}, {cell}, set_to(cur + eps))
        if self._valid(touched):
            return True
        self._apply({}, {cell}, set_to(cur))
        return False

    @property
    def hopf_total(self) -> int:
        return sum(self.weight[self.N].values())

    def build(self) -> CubicalMap:
        cells = {c: CellLink(BalancedLink(0, 0, 0, e)) for c, e in self.units.items()}
        return CubicalMap(self.N, 0, dict(self.faces[0]), cells, self.hopf_total)


def _random_rect(rng, G):
    axes = sorted(rng.choice(3, size=2, replace=False).tolist())
    fixed = [int(x) for x in rng.integers(0, G, size=3)]
    x0, x1 = sorted(rng.choice(G, size=2, replace=False).tolist())
    y0, y1 = sorted(rng.choice(G, size=2, replace=False).tolist())
    return _loop_cells(axes, fixed, x0, x1, y0, y1)


def random_builder(rng, N: int, loops: int | None = None, units: int | None = None,
                   c_deg: int = C_DEG, table=None) -> MapBuilder:
    G = 2 ** N
    loops = G * G // 4 if loops is None else loops
    units = G if units is None else units
    mb = MapBuilder(N, c_deg, table)
    if G >= 2:
        for _ in range(loops):
            mb.try_loop(_random_rect(rng, G), int(rng.choice([-1, 1])))
    for _ in range(units):
        mb.try_unit(tuple(int(x) for x in rng.integers(0, G, size=3)), int(rng.choice([-1, 1])))
    return mb


def random_map(rng, N: int, loops: int | None = None, units: int | None = None,
               c_deg: int = C_DEG, table=None) -> CubicalMap:
    """Valid scale-1 map built from random rectangular flux loops (degree +-1) and units.

    Closure holds by construction; loops or units that would break the degree
    bound or the link fit at any coarser level are rejected, so the whole
    coarsening ladder of the result is valid.
    """
    return random_builder(rng, N, loops, units, c_deg, table).build()


def match_hopf(mb: MapBuilder, target: int, rng) -> CubicalMap:
    """Add units to random cells of a builder until its Hopf total is ``target``."""
    G = 2 ** mb.N
    tries = 0
    while mb.hopf_total != target:
        s = 1 if target > mb.hopf_total else -1
        mb.try_unit(tuple(int(x) for x in rng.integers(0, G, size=3)), s)
        tries += 1
        if tries > 50 * G ** 3:
            raise PreconditionError(f"could not reach Hopf total {target}")
    return mb.build()


def whitehead_builder(N: int, c_deg: int = C_DEG, table=None) -> MapBuilder:
    """Parallel unlinked flux loops: nested squares in every y-slice, one orientation.

    Every wire loop bounds a disk meeting no other loop, so the preimages are
    those of a degree map pulled back along a projection; the map then
    carries as much degree through the half plane x < G/2, z = G/2 as the
    degree bound and the coarse fits allow.
    """
    G = 2 ** N
    mb = MapBuilder(N, c_deg, table)
    for y in range(G):
        for r in range(G // 2):
            mb.try_loop(_loop_cells((0, 2), (0, y, 0), r, G - 1 - r, r, G - 1 - r), 1)
    return mb


def whitehead_map(N: int, c_deg: int = C_DEG, table=None, seed: int = 0) -> CubicalMap:
    """Null-homotopic flux-tube map on a 2^N grid (template framing cancelled by units)."""
    return match_hopf(whitehead_builder(N, c_deg, table), 0, np.random.default_rng(seed))


def flux_through(m: CubicalMap, axis: int = 2, at: int | None = None) -> int:
    """Total |degree| crossing the half plane {coordinate ``axis`` = at, first other coordinate < G/2}."""
    G = m.G
    at = G // 2 if at is None else at
    other = [a for a in range(3) if a != axis][0]
    return sum(abs(d) for (ax, *c), d in m.faces.items() if ax == axis and c[axis] == at and c[other] < G // 2)


def random_pair(rng, N: int, **kw):
    """Two independent random maps with equal Hopf totals (f0 adjusted by units)."""
    f1 = random_map(rng, N, **kw)
    f0 = match_hopf(random_builder(rng, N, **kw), f1.hopf_total, rng)
    return f0, f1
