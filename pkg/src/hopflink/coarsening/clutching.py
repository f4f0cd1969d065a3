"""Clutching of a 2x2x2 block of fine cells against its coarse cell.

The descriptor lists the template cables of the eight fine cells (positive)
and of the coarse cell (negative, so its lambda and tau entries are negated),
the monodromy of the wires through the block and the Hopf residual that makes
the total vanish. Its null-homotopy opens the clutching into link terms
(swapping cables, crossing links, twists, residual link) and funnels them
into two balanced links that cancel.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from ..errors import HopfMismatch, InconsistentBlock, MalformedInput, MoveError
from ..links import codec
from ..links.arith import add_balanced
from ..links.cancel import cancel_core
from ..links.interlocked import twisted_to_balanced
from ..links.moves import degree_bound
from ..links.terms import (BalancedLink, SignedTerm, Standard, Twisted, Unit, balanced_for_hopf,
                           hopf_invariant)
from ..links.trace import CostModel, MoveTrace, negate_trace, register
from ..monodromy import BlockPermutation, decompose
from .cubical import CellLink, assign_cable_degrees, block_cells, twist_hopf, wire_ranges
from .templates import default_table

COARSE = 8  # tag of the coarse cell in a descriptor's cable list


@dataclass
class ClutchingDescriptor:
    degrees: list = field(default_factory=list)
    lam: dict = field(default_factory=dict)  # (i, j) with i < j -> integer
    tau: list = field(default_factory=list)
    monodromy: BlockPermutation | None = None
    hopf_residual: int = 0
    scale: int = 1  # side of the fine cells
    template_length: Fraction = Fraction(0)  # longest template centerline, in cell sides
    cables: list = field(default_factory=list)  # (cell tag 0..8, template cable id)

    def __post_init__(self):
        self.degrees = [int(d) for d in self.degrees]
        self.tau = [int(t) for t in self.tau]
        if not self.tau:
            self.tau = [0] * len(self.degrees)
        if len(self.tau) != len(self.degrees) or min(self.degrees, default=0) < 0:
            raise MalformedInput("need one nonnegative degree and one twist per cable")
        lam = {}
        for (i, j), v in dict(self.lam).items():
            i, j = sorted((int(i), int(j)))
            if i == j or not 0 <= i < j < len(self.degrees):
                raise MalformedInput(f"bad crossing pair ({i}, {j})")
            if v:
                lam[(i, j)] = lam.get((i, j), 0) + int(v)
        self.lam = {k: v for k, v in sorted(lam.items()) if v}
        self.template_length = Fraction(self.template_length)

    @property
    def swaps(self) -> list:
        key = self.monodromy
        if getattr(self, "_swaps", (self,))[0] is not key:
            self._swaps = (key, decompose(key) if key is not None else [])
        return self._swaps[1]

    @property
    def swap_hopf(self) -> int:
        return sum(s.d1 * s.d2 for s in self.swaps)

    @property
    def cable_hopf(self) -> int:
        d = self.degrees
        return (sum(2 * v * d[i] * d[j] for (i, j), v in self.lam.items())
                + sum(twist_hopf(t, x) for t, x in zip(self.tau, d)))

    @property
    def defect(self) -> int:
        """Left-hand side of the descriptor invariant; zero for a valid descriptor."""
        return self.cable_hopf + self.swap_hopf + self.hopf_residual

    @property
    def is_zero(self) -> bool:
        trivial = self.monodromy is None or self.monodromy.k == 1 and self.monodromy.shifts[0] == 0
        return not any(self.degrees) and trivial and not self.hopf_residual

    def geometric_length(self) -> Fraction:
        """Reshaping (4 coarse sides) plus contraction of the cables (template length per side)."""
        if self.is_zero:
            return Fraction(0)
        n = 2 * self.scale
        return 4 * n + n * self.template_length

    def to_key(self) -> tuple:
        return (tuple(self.degrees), tuple(self.lam.items()), tuple(self.tau),
                (self.monodromy.N, self.monodromy.cuts, self.monodromy.shifts) if self.monodromy else None,
                self.hopf_residual, self.scale, self.template_length, tuple(map(tuple, self.cables)))

    @classmethod
    def from_key(cls, key) -> "ClutchingDescriptor":
        d, lam, tau, mono, h, scale, length, cables = key
        return cls(list(d), dict(lam), list(tau), BlockPermutation(*mono) if mono else None, h, scale,
                   length, list(cables))

    def to_json(self) -> dict:
        return {"degrees": self.degrees, "lambda": [[i, j, v] for (i, j), v in self.lam.items()],
                "tau": self.tau, "monodromy": self.monodromy.to_json() if self.monodromy else None,
                "hopf_residual": self.hopf_residual, "scale": self.scale,
                "template_length": codec.fraction_to_str(self.template_length), "cables": [list(c) for c in self.cables]}

    @classmethod
    def from_json(cls, obj) -> "ClutchingDescriptor":
        try:
            mono = obj.get("monodromy")
            return cls(list(obj.get("degrees", [])), {(i, j): v for i, j, v in obj.get("lambda", [])},
                       list(obj.get("tau", [])), BlockPermutation.from_json(mono) if mono else None,
                       int(obj.get("hopf_residual", 0)), int(obj.get("scale", 1)),
                       Fraction(obj.get("template_length", "0")),
                       [tuple(c) for c in obj.get("cables", [])])
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedInput(f"bad clutching descriptor: {exc}") from exc


# ---- building a descriptor from face data ----

def _quadrant(cell, axis):
    """Position of a fine cell's sub-face on the coarse face normal to ``axis``."""
    u, v = [cell[a] % 2 for a in range(3) if a != axis]
    return 2 * u + v


_TABLES = {}


def _follow_tables(inflows, table):
    _TABLES.setdefault(table.digest, table)
    return _follow_cached(inflows, table.digest)


@lru_cache(maxsize=1 << 15)
def _follow_cached(inflows, digest):
    """For one cell: cable degrees and, per entering face, (lo, hi, exit face, exit lo) rows."""
    table = _TABLES[digest]
    d = assign_cable_degrees(inflows, table)
    d.setflags(write=False)
    ranges = wire_ranges(inflows, table, d)
    into = {}
    for f, rows in ranges.items():
        if inflows[f] < 0:
            for c, lo, hi in rows:
                into[c] = lo
    out = {}
    for f, rows in ranges.items():
        if inflows[f] > 0:
            out[f] = [(lo, hi, table.entries[c]["face_to"], into[c]) for c, lo, hi in rows if hi >= lo]
    return d, out


def _exit(route, f, k):
    for lo, hi, g, lo_g in route[f]:
        if lo <= k <= hi:
            return g, lo_g + k - lo
    raise InconsistentBlock(f"wire {k} on face {f} has no cable")


def clutching_from_inflows(fine_inflows, coarse_inflows, fine_hopf=None, coarse_hopf=None, scale=1,
                           table=None) -> ClutchingDescriptor:
    """Descriptor of a block given the six inflows of each fine cell (in block order) and of the coarse cell.

    When the cell-link invariants are given (sum over the fine cells, and the
    coarse cell) they must balance the cables; the residual link then stands
    for the fine links, the reversed coarse link and the inverse swaps.
    """
    table = table or default_table()
    offsets = [(i, j, k) for i in (0, 1) for j in (0, 1) for k in (0, 1)]
    fine_inflows = [tuple(int(x) for x in f) for f in fine_inflows]
    coarse_inflows = tuple(int(x) for x in coarse_inflows)
    if len(fine_inflows) != 8 or any(len(f) != 6 or sum(f) for f in fine_inflows) \
            or len(coarse_inflows) != 6 or sum(coarse_inflows):
        raise InconsistentBlock("every cell needs six inflows summing to zero")
    for cell, inf in zip(offsets, fine_inflows):
        for f in range(6):
            axis, side = divmod(f, 2)
            if cell[axis] != side:
                nb = list(cell)
                nb[axis] = side
                if fine_inflows[offsets.index(tuple(nb))][f ^ 1] != -inf[f]:
                    raise InconsistentBlock(f"shared face of {cell} disagrees with its neighbour")
    for f in range(6):
        axis, side = divmod(f, 2)
        tot = sum(inf[f] for cell, inf in zip(offsets, fine_inflows) if cell[axis] == side)
        if tot != coarse_inflows[f]:
            raise InconsistentBlock(f"coarse face {f} carries {coarse_inflows[f]}, sub-faces sum to {tot}")

    # cable list: fine cells first, coarse last (negated)
    cables, degrees, tau, lam = [], [], [], {}
    routes = []
    for tag, inf in enumerate(fine_inflows + [coarse_inflows]):
        d, route = _follow_tables(inf, table)
        routes.append(route)
        sign = -1 if tag == COARSE else 1
        ids = [int(c) for c in np.nonzero(d)[0]]
        base = len(cables)
        for c in ids:
            cables.append((tag, c))
            degrees.append(int(d[c]))
            tau.append(sign * int(table.tau[c]))
        for x in range(len(ids)):
            for y in range(x + 1, len(ids)):
                v = int(table.lam[ids[x], ids[y]])
                if v:
                    lam[(base + x, base + y)] = sign * v

    # boundary slots per coarse face: (cell index, local wire) in quadrant order
    enter, leave = {f: [] for f in range(6)}, {f: [] for f in range(6)}
    for f in range(6):
        axis, side = divmod(f, 2)
        cells = sorted((_quadrant(c, axis), n) for n, c in enumerate(offsets) if c[axis] == side)
        for _, n in cells:
            deg = fine_inflows[n][f]
            slots = enter[f] if deg > 0 else leave[f]
            slots.extend((n, k) for k in range(1, abs(deg) + 1))
    index = {}
    for f in range(6):
        for i, (n, k) in enumerate(enter[f]):
            index[(f, n, k)] = len(index) + 1
    total = len(index)
    leave_pos = {(f, n, k): i for f in range(6) for i, (n, k) in enumerate(leave[f])}

    coarse_route = routes[COARSE]
    coarse_into = {}  # coarse sink face, wire -> coarse source face, wire
    for f, rows in coarse_route.items():
        for lo, hi, g, lo_g in rows:
            for j in range(hi - lo + 1):
                coarse_into[(g, lo_g + j)] = (f, lo + j)

    sigma = [0] * total
    for (f, n, k), e in index.items():
        cell, face, wire = n, f, k
        for _ in range(8 * 6 + 1):
            g, wire = _exit(routes[cell], face, wire)
            axis, side = divmod(g, 2)
            if offsets[cell][axis] != side:  # internal face: continue in the neighbour
                nb = list(offsets[cell])
                nb[axis] = side
                cell, face = offsets.index(tuple(nb)), g ^ 1
                continue
            break
        else:
            raise InconsistentBlock("wire does not leave the block")
        i = leave_pos[(g, cell, wire)]
        E, X = enter[g], leave[g]
        if i < len(E):  # U-turn along the boundary of the coarse face
            n2, k2 = E[i]
            sigma[e - 1] = index[(g, n2, k2)]
            continue
        p = i - len(E) + 1  # coarse wire leaving through g
        src, q = coarse_into[(g, p)]
        n2, k2 = enter[src][len(leave[src]) + q - 1]
        sigma[e - 1] = index[(src, n2, k2)]

    mono = _compress(sigma) if total else None
    length = Fraction(math.ceil(table.max_length * 8), 8)  # rounded up to eighths of a side
    desc = ClutchingDescriptor(degrees, lam, tau, mono, 0, scale, length, cables)
    if fine_hopf is not None and fine_hopf - coarse_hopf != -desc.cable_hopf:
        raise InconsistentBlock(f"cell links ({fine_hopf} fine, {coarse_hopf} coarse) do not balance "
                                f"cable invariant {desc.cable_hopf}")
    desc.hopf_residual = -(desc.cable_hopf + desc.swap_hopf)
    return desc


def _compress(sigma) -> BlockPermutation:
    cuts, shifts = [1], [sigma[0] - 1]
    for x in range(2, len(sigma) + 1):
        if sigma[x - 1] != sigma[x - 2] + 1:
            cuts.append(x)
            shifts.append(sigma[x - 1] - x)
    cuts.append(len(sigma) + 1)
    return BlockPermutation(len(sigma), tuple(cuts), tuple(shifts)).normalized()


def build_clutching(m, coarse_cell, cm, table=None) -> ClutchingDescriptor:
    """Descriptor for the block of ``m`` under ``coarse_cell`` of the coarse map ``cm``."""
    cells = block_cells(coarse_cell)
    fine_h = sum(m.link(c).hopf for c in cells)
    desc = _descriptor_cached(tuple(m.inflows(c) for c in cells), cm.inflows(coarse_cell), m.scale,
                              (table or default_table()).digest)
    if fine_h - cm.link(coarse_cell).hopf != -desc.cable_hopf:
        raise InconsistentBlock(f"cell links at {coarse_cell} do not balance the cable invariant")
    return desc


@lru_cache(maxsize=1 << 14)
def _descriptor_cached(fine, coarse, scale, digest):
    # blocks repeat a lot at fine levels; descriptors are treated as read-only
    return clutching_from_inflows(fine, coarse, None, None, scale, _TABLES.get(digest) or default_table())


# ---- opening the clutching into link terms ----

def clutching_pieces(desc: ClutchingDescriptor) -> list:
    """The link content as (kind, sign, data) pieces, in emission order.

    kinds: "twisted" (d), "standard" (a, b), "unit" (), "balanced" (BalancedLink).
    A full turn of a degree-d cable is two twisted links plus one unit turn
    per wire; the d unit turns are emitted as d//2 | 1 plus a single unit.
    """
    out = []
    for s in desc.swaps:
        out += [("twisted", 1, s.d1 + s.d2), ("twisted", -1, s.d1), ("twisted", -1, s.d2)]
    d = desc.degrees
    for (i, j), v in desc.lam.items():
        if d[i] and d[j]:
            out += [("standard", 1 if v > 0 else -1, (d[i], d[j]))] * abs(v)
    for t, x in zip(desc.tau, d):
        if not t or not x:
            continue
        sign = 1 if t > 0 else -1
        full, half = divmod(abs(t), 2)
        if x > 1:
            out += [("twisted", sign, x)] * (2 * full + half)
        turns = full * x
        if turns // 2:
            out.append(("standard", sign, (turns // 2, 1)))
        if turns % 2:
            out.append(("unit", sign, None))
    h = desc.hopf_residual
    if h:
        out.append(("balanced", 1 if h > 0 else -1, balanced_for_hopf(abs(h))))
    return out


def _piece_terms(kind, sign, data):
    if kind == "twisted":
        return (SignedTerm(sign, Twisted(data)),)
    if kind == "standard":
        return (SignedTerm(sign, Standard(*data)),)
    if kind == "unit":
        return (SignedTerm(sign, Unit(1)),)
    return data.terms(sign)


def clutching_expression(desc: ClutchingDescriptor) -> tuple:
    return tuple(t for p in clutching_pieces(desc) for t in _piece_terms(*p))


def _open_cost(consumed, params, model):
    return model.kappa * ClutchingDescriptor.from_json(params["descriptor"]).geometric_length()


@register("open_clutching", _open_cost, ("descriptor",))
def _open_clutching(consumed, params, model):
    """Reshape and contract the block's cables; what is left is a list of links of total invariant 0."""
    if consumed:
        raise MoveError("open_clutching consumes nothing")
    desc = ClutchingDescriptor.from_json(params["descriptor"])
    if desc.defect:
        raise MoveError(f"clutching descriptor is off by {desc.defect}")
    return clutching_expression(desc)


def _as_balanced(trace, model, kind, sign, data):
    """Turn one piece (already in the state) into a balanced link of the same sign."""
    if kind == "balanced":
        return data
    if kind == "unit":
        return BalancedLink(0, 0, 0, 1)
    if kind == "standard":
        trace.record("create_null", (), {"sign": sign}, model)
        return BalancedLink(data[0], data[1], 0)
    target = balanced_for_hopf(data * (data - 1) // 2)
    sub = twisted_to_balanced(Twisted(data), target, model)
    trace.extend(sub if sign > 0 else negate_trace(sub, model))
    return target


def null_homotopy_clutching(desc: ClutchingDescriptor, model: CostModel | None = None) -> MoveTrace:
    """Trace from nothing to nothing that opens the clutching and cancels all its links."""
    model = model or CostModel()
    if desc.defect:
        raise HopfMismatch(f"descriptor invariant is off by {desc.defect}")
    trace = MoveTrace()
    if desc.is_zero:
        return trace
    return MoveTrace(_null_cached(desc.to_key(), model).steps)


@lru_cache(maxsize=1 << 12)
def _null_cached(key, model):
    desc = ClutchingDescriptor.from_key(key)
    trace = MoveTrace()
    produced = trace.record("open_clutching", (), {"descriptor": desc.to_json()}, model)
    if not produced:
        return trace
    if max(degree_bound(t) for t in produced) < model.base_threshold:
        trace.record("null_certificate", produced, {"groups": [len(produced)], "measure": "degree"}, model)
        return trace
    pools = {1: None, -1: None}
    for kind, sign, data in clutching_pieces(desc):
        link = _as_balanced(trace, model, kind, sign, data)
        acc = pools[sign]
        if acc is None:
            pools[sign] = link
            continue
        target = balanced_for_hopf(acc.hopf + link.hopf)
        sub = add_balanced(acc, link, target, model=model)
        trace.extend(sub if sign > 0 else negate_trace(sub, model))
        pools[sign] = target
    zero = BalancedLink(0, 0, 0)
    cancel_core(trace, model, pools[1] or zero, pools[-1] or zero)
    return trace
