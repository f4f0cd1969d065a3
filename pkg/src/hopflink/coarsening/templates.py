"""The fixed per-cell cable template and its linking data.

Every ordered pair of distinct cell faces (F, G) owns one cable running from
F to G. Its centerline in the cube [0, 12]^3 goes from a port on F, steps
inward, passes a private hub point and leaves through a port on G. For the
linking data each arc is closed outside the cube through a far point of its
own, and the linking oracle gives the matrix lambda (pairwise linking of the
closed arcs) and tau (twice the writhe, i.e. the half-turn count of a cable
whose wires keep their orientation).
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources

import numpy as np

from ..errors import MalformedInput
from .oracle import linking_oracle

VERSION = 1
SIDE = 12
FACES = [(axis, side) for axis in range(3) for side in (0, 1)]  # face index f = 2*axis + side
PAIRS = [(f, g) for f in range(6) for g in range(6) if f != g]  # cable id = index in this list
CABLE_ID = {p: k for k, p in enumerate(PAIRS)}


def face_point(f: int, u, v, depth=0):
    """Point on face f with in-face coordinates (u, v), moved ``depth`` inward."""
    axis, side = FACES[f]
    others = [a for a in range(3) if a != axis]
    p = [0, 0, 0]
    p[axis] = depth if side == 0 else SIDE - depth
    p[others[0]], p[others[1]] = u, v
    return tuple(Fraction(c) for c in p)


def order_index(f: int, g: int) -> int:
    """Position of the cable between f and g among the cables touching f."""
    partners = [h for h in range(6) if h != f]
    return partners.index(g)


def _port(f, g, outgoing):
    k = order_index(f, g)
    return Fraction(2 + 2 * k), Fraction(4 if outgoing else 8)


def centerline(f: int, g: int):
    cid = CABLE_ID[(f, g)]
    uf, vf = _port(f, g, True)
    ug, vg = _port(g, f, False)
    hub = (Fraction(3) + Fraction(cid % 5) * Fraction(3, 2) + Fraction(cid, 97),
           Fraction(3) + Fraction((cid // 5) % 3) * 2 + Fraction(cid, 89),
           Fraction(3) + Fraction(cid // 15) * 3 + Fraction(cid % 7, 11))
    return [face_point(f, uf, vf), face_point(f, uf, vf, 1), hub, face_point(g, ug, vg, 1), face_point(g, ug, vg)]


def _closure(f, g):
    cid = CABLE_ID[(f, g)]
    uf, vf = _port(f, g, True)
    ug, vg = _port(g, f, False)
    far = (Fraction(200 + 7 * cid), Fraction(-150 + 11 * cid), Fraction(300 - 13 * cid))
    return [face_point(g, ug, vg, -1 - Fraction(cid, 50)), far, face_point(f, uf, vf, -1 - Fraction(cid, 60))]


def l1_length(poly) -> Fraction:
    return sum((sum(abs(a - b) for a, b in zip(p, q)) for p, q in zip(poly, poly[1:])), Fraction(0))


@dataclass
class TemplateTable:
    """Per-cell cable template: 30 cables, their order on faces, lambda and tau."""

    entries: list  # per cable id: dict(face_from, face_to, cable, order_from, order_to, orientation)
    lam: np.ndarray  # 30 x 30 integer, symmetric, zero diagonal
    tau: np.ndarray  # 30 integer half-turn counts (even)
    lengths: list  # L1 centerline lengths in cell units (Fractions)
    version: int = VERSION
    digest: str = ""

    def cables_on_face(self, f: int, outgoing: bool) -> list:
        """Cable ids leaving (or entering) face f, in face order."""
        if outgoing:
            ids = [CABLE_ID[(f, g)] for g in range(6) if g != f]
        else:
            ids = [CABLE_ID[(g, f)] for g in range(6) if g != f]
        return sorted(ids, key=lambda c: self.entries[c]["order_from" if outgoing else "order_to"])

    @property
    def max_length(self) -> Fraction:
        return max(self.lengths)

    def content(self) -> dict:
        return {"version": self.version, "entries": self.entries,
                "lambda": [[int(x) for x in row] for row in self.lam],
                "tau": [int(x) for x in self.tau], "lengths": [str(x) for x in self.lengths]}

    def to_json(self) -> dict:
        out = self.content()
        out["hash"] = _digest(out)
        return out

    @classmethod
    def from_json(cls, obj) -> "TemplateTable":
        try:
            body = {k: obj[k] for k in ("version", "entries", "lambda", "tau", "lengths")}
            if obj.get("hash") != _digest(body):
                raise MalformedInput("template table hash does not match its content")
            lam = np.array(body["lambda"], dtype=np.int64)
            tau = np.array(body["tau"], dtype=np.int64)
            if lam.shape != (30, 30) or tau.shape != (30,) or not (lam == lam.T).all():
                raise MalformedInput("template table needs a symmetric 30x30 lambda and 30 twists")
            return cls(list(body["entries"]), lam, tau, [Fraction(x) for x in body["lengths"]],
                       int(body["version"]), obj["hash"])
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedInput(f"bad template table: {exc}") from exc


def _digest(body) -> str:
    return hashlib.sha256(json.dumps(body, sort_keys=True).encode()).hexdigest()


def generate_template_table() -> TemplateTable:
    """Build the table from the canonical centerlines with the linking oracle."""
    entries, loops, lengths = [], [], []
    for f, g in PAIRS:
        entries.append({"cable": CABLE_ID[(f, g)], "face_from": f, "face_to": g,
                        "order_from": order_index(f, g), "order_to": order_index(g, f), "orientation": 1})
        arc = centerline(f, g)
        loops.append(arc + _closure(f, g))
        lengths.append(l1_length(arc) / SIDE)
    res = linking_oracle(loops)
    lam = res.lk_int
    tau = np.array([2 * w for w in res.writhe], dtype=np.int64)
    table = TemplateTable(entries, lam, tau, lengths)
    table.digest = _digest(table.content())
    return table


_CACHE = {}


def default_table() -> TemplateTable:
    """The shipped table (data/templates.json)."""
    if "t" not in _CACHE:
        text = resources.files(__package__).joinpath("data/templates.json").read_text()
        _CACHE["t"] = TemplateTable.from_json(json.loads(text))
    return _CACHE["t"]


def write_table(path) -> TemplateTable:
    table = generate_template_table()
    with open(path, "w") as fh:
        json.dump(table.to_json(), fh, indent=1, sort_keys=True)
    return table
