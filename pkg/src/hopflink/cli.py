"""Command line front end.

Exit codes: 0 ok, 2 validation failure, 3 Hopf mismatch, 4 malformed input.
"""
from __future__ import annotations

import argparse
import configparser
import json
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from . import cable_geometry as cg
from .bounds import LowerBoundQuery, lower_bound_length
from .errors import HopfLinkError, HopfMismatch, MalformedInput
from .links import codec
from .links.balance import balance
from .links.cancel import cancel
from .links.terms import BalancedLink, SignedTerm, Standard, Unit
from .links.trace import CostModel, MoveTrace, verify_trace
from .monodromy import BlockPermutation, decompose

EXIT_OK, EXIT_INVALID, EXIT_HOPF, EXIT_MALFORMED = 0, 2, 3, 4


@dataclass
class RunConfig:
    kappa: Fraction = Fraction(1)
    C_bal: Fraction = Fraction(7, 2)
    C_cancel: Fraction = Fraction(12)
    C: int = 4  # additive slack of the halving loop in balancing
    B: int = 64
    K: int = 4
    V: Fraction = Fraction(1)
    c_deg: int = 2
    h: Fraction = Fraction(1, 8)
    seed: int = 0

    def __post_init__(self):
        for name in ("kappa", "C_bal", "C_cancel", "V", "h"):
            setattr(self, name, Fraction(getattr(self, name)))
        for name in ("C", "B", "K", "c_deg", "seed"):
            setattr(self, name, int(getattr(self, name)))
        if min(self.kappa, self.C_bal, self.C_cancel, self.V, self.h) <= 0:
            raise MalformedInput("kappa, C_bal, C_cancel, V and h must be positive")
        if self.B < 1 or self.K < 2 or self.c_deg < 1 or self.C < 0:
            raise MalformedInput("need B >= 1, K >= 2, c_deg >= 1 and C >= 0")

    def model(self) -> CostModel:
        return CostModel(self.kappa, self.C_bal, self.C_cancel, self.B, self.C)

    @classmethod
    def load(cls, path) -> "RunConfig":
        """Flat ``key = value`` file; '#' starts a comment."""
        parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
        parser.optionxform = str
        try:
            parser.read_string("[run]\n" + Path(path).read_text())
        except (OSError, configparser.Error) as exc:
            raise MalformedInput(f"cannot read config {path}: {exc}") from exc
        known = set(cls.__dataclass_fields__)
        values = dict(parser["run"])
        unknown = set(values) - known
        if unknown:
            raise MalformedInput(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**values)
        except (TypeError, ValueError, ZeroDivisionError) as exc:
            raise MalformedInput(f"bad config value: {exc}") from exc


def _load_json(path):
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise MalformedInput(f"cannot read {path}: {exc}") from exc


def _write(path, obj):
    Path(path).write_text(codec.dumps(obj) + "\n")


def _link_str(x: BalancedLink) -> str:
    return "{%d,%d,%d,%d}" % (x.a, x.b, x.c, x.eps)


def _balanced_arg(obj) -> BalancedLink:
    if isinstance(obj, list) and len(obj) in (3, 4):
        obj = dict(zip(("a", "b", "c", "eps"), obj))
    return codec.balanced_from_json(obj)


# ---- subcommands; each returns (exit code, json payload, text) ----

def cmd_balance(args, cfg):
    eps = args.eps if args.eps is not None else 0
    if eps not in (-1, 0, 1):
        raise MalformedInput("eps must be -1, 0 or 1")
    terms = [SignedTerm(1, Standard(args.a, args.b)), SignedTerm(1, Standard(args.c, 1))]
    if eps:
        terms.append(SignedTerm(1, Unit(eps)))
    out, trace = balance(tuple(terms), cfg.model())
    _write(args.trace, trace.to_json())
    payload = {"link": codec.balanced_to_json(out), "cost": codec.fraction_to_str(trace.total_cost),
               "steps": len(trace), "trace": str(args.trace)}
    return EXIT_OK, payload, f"{_link_str(out)}  cost {codec.fraction_to_str(trace.total_cost)}  trace -> {args.trace}"


def cmd_cancel(args, cfg):
    x = _balanced_arg(_load_json(args.x))
    y = _balanced_arg(_load_json(args.y))
    trace = cancel(x, y, cfg.model())
    _write(args.trace, trace.to_json())
    payload = {"cost": codec.fraction_to_str(trace.total_cost), "steps": len(trace), "trace": str(args.trace)}
    return EXIT_OK, payload, f"cancelled in {len(trace)} steps, cost {payload['cost']}  trace -> {args.trace}"


def cmd_perm(args, cfg):
    sigma = BlockPermutation.from_json(_load_json(args.sigma))
    swaps = decompose(sigma)
    rows = [{"d1": s.d1, "d2": s.d2, "offset": s.offset} for s in swaps]
    text = "\n".join(f"swap [{s.offset},{s.offset + s.d1}) <-> [{s.offset + s.d1},{s.offset + s.d1 + s.d2})"
                     for s in swaps) or "identity"
    return EXIT_OK, {"N": sigma.N, "k": sigma.k, "swaps": rows}, text


def cmd_comb(args, cfg):
    c1 = cg.AbstractCableSpec.from_json(_load_json(args.c1))
    c2 = cg.AbstractCableSpec.from_json(_load_json(args.c2))
    for c in (c1, c2):
        rep = cg.validate_cable(c, cfg.V)
        if not rep.ok:
            return EXIT_INVALID, {"ok": False, "check": rep.check, "message": rep.message}, \
                f"input cable invalid ({rep.check}): {rep.message}"
    hom = cg.comb(c1, c2)
    audit = cg.audit_homotopy(hom, cfg.V, start=c1, end=c2)
    _write(args.out, hom.to_json())
    if args.csv:
        hom.write_csv(args.csv)
    payload = {"ok": audit.ok, "frames": audit.frames, "alpha_speed": audit.alpha_speed,
               "time_speed": audit.time_speed, "limit": codec.fraction_to_str(audit.limit),
               "failures": [[i, r.check, r.message] for i, r in audit.failures], "homotopy": str(args.out)}
    text = (f"{'ok' if audit.ok else 'FAILED'}: {audit.frames} frames, speeds {audit.alpha_speed:.3f} / "
            f"{audit.time_speed:.3f} (limit {audit.limit})  homotopy -> {args.out}")
    return (EXIT_OK if audit.ok else EXIT_INVALID), payload, text


def _map(path):
    from .coarsening import CubicalMap
    return CubicalMap.from_json(_load_json(path))


def cmd_coarsen(args, cfg):
    from .coarsening import coarsen_step
    m = _map(args.map)
    res = coarsen_step(m, cfg.model(), cfg.c_deg)
    _write(args.out, res.coarse.to_json())
    _write(args.trace, res.trace.to_json())
    payload = {"level": res.coarse.level, "cost": codec.fraction_to_str(res.cost),
               "trace_cost": codec.fraction_to_str(res.trace.total_cost), "blocks": len(res.block_costs),
               "hopf_total": res.coarse.hopf_total, "map": str(args.out), "trace": str(args.trace)}
    return EXIT_OK, payload, (f"level {m.level} -> {res.coarse.level}: step cost {payload['cost']} over "
                              f"{payload['blocks']} blocks  map -> {args.out}  trace -> {args.trace}")


def cmd_plan(args, cfg):
    from .coarsening import plan_homotopy
    rep = plan_homotopy(_map(args.f0), _map(args.f1), cfg.model(), cfg.c_deg, keep_traces=False)
    obj = rep.to_json()
    if args.out:
        _write(args.out, obj)
    text = "level costs " + " ".join(obj["level_costs"]) + f"\ntotal {obj['total_cost']}  linear {obj['linear']}"
    return EXIT_OK, obj, text


def cmd_verify(args, cfg):
    init = codec.expression_from_json(_load_json(args.init))
    final = codec.expression_from_json(_load_json(args.final))
    trace = MoveTrace.from_json(_load_json(args.trace))
    rep = verify_trace(init, trace, final, cfg.model())
    payload = {"ok": rep.ok, "step": rep.step, "check": rep.check, "message": rep.message,
               "cost": codec.fraction_to_str(trace.total_cost)}
    if rep.ok:
        return EXIT_OK, payload, f"valid: {len(trace)} steps, cost {payload['cost']}"
    return EXIT_INVALID, payload, f"rejected at step {rep.step} (check {rep.check}): {rep.message}"


def cmd_lower(args, cfg):
    res = lower_bound_length(LowerBoundQuery(args.L, args.n, Fraction(args.C)))
    payload = {"length": codec.fraction_to_str(res.length), "total_degree": res.total_degree,
               "flux": codec.fraction_to_str(res.flux)}
    return EXIT_OK, payload, str(res.length)


def cmd_random_map(args, cfg):
    import numpy as np
    from .coarsening import random_map
    m = random_map(np.random.default_rng(cfg.seed), args.N, c_deg=cfg.c_deg)
    _write(args.out, m.to_json())
    return EXIT_OK, {"N": m.N, "faces": len(m.faces), "hopf_total": m.hopf_total, "map": str(args.out)}, \
        f"N={m.N}: {len(m.faces)} nonzero faces, Hopf total {m.hopf_total}  map -> {args.out}"


def cmd_random_pair(args, cfg):
    import numpy as np
    from .coarsening import random_pair
    f0, f1 = random_pair(np.random.default_rng(cfg.seed), args.N, c_deg=cfg.c_deg)
    _write(args.out0, f0.to_json())
    _write(args.out1, f1.to_json())
    return EXIT_OK, {"N": args.N, "hopf_total": f0.hopf_total, "maps": [str(args.out0), str(args.out1)]}, \
        f"N={args.N}: two maps of Hopf total {f0.hopf_total}  -> {args.out0}, {args.out1}"


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hopflink", description="Hopf-link calculus and coarsening homotopies")
    p.add_argument("--config", help="flat key = value file (kappa, C_bal, C_cancel, C, B, K, V, c_deg, h, seed)")
    p.add_argument("--json", action="store_true", help="machine-readable stdout")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("balance", help="balance a|b + c|1 (+eps)")
    for name in ("a", "b", "c"):
        s.add_argument(name, type=int)
    s.add_argument("eps", type=int, nargs="?")
    s.add_argument("--trace", default="balance_trace.json")
    s.set_defaults(fn=cmd_balance)

    s = sub.add_parser("cancel", help="cancel two balanced links of equal invariant")
    s.add_argument("x")
    s.add_argument("y")
    s.add_argument("--trace", default="cancel_trace.json")
    s.set_defaults(fn=cmd_cancel)

    s = sub.add_parser("perm-decompose", help="two-block swaps of a block permutation")
    s.add_argument("sigma")
    s.set_defaults(fn=cmd_perm)

    s = sub.add_parser("comb", help="comb homotopy between two cables, with audit")
    s.add_argument("c1")
    s.add_argument("c2")
    s.add_argument("--out", default="homotopy.json")
    s.add_argument("--csv")
    s.set_defaults(fn=cmd_comb)

    s = sub.add_parser("coarsen", help="one coarsening step of a cubical map")
    s.add_argument("map")
    s.add_argument("--out", default="coarse_map.json")
    s.add_argument("--trace", default="coarsen_trace.json")
    s.set_defaults(fn=cmd_coarsen)

    s = sub.add_parser("plan", help="homotopy plan between two scale-1 maps")
    s.add_argument("f0")
    s.add_argument("f1")
    s.add_argument("--out", help="write the plan report here")
    s.set_defaults(fn=cmd_plan)

    s = sub.add_parser("verify-trace", help="replay and check a move trace")
    s.add_argument("init")
    s.add_argument("trace")
    s.add_argument("final")
    s.set_defaults(fn=cmd_verify)

    s = sub.add_parser("lower-bound", help="minimal length L/C for the degree-L^n family")
    s.add_argument("L", type=int)
    s.add_argument("n", type=int)
    s.add_argument("C", type=str)
    s.set_defaults(fn=cmd_lower)

    s = sub.add_parser("random-map", help="random valid scale-1 cubical map (uses seed)")
    s.add_argument("N", type=int)
    s.add_argument("--out", default="map.json")
    s.set_defaults(fn=cmd_random_map)

    s = sub.add_parser("random-pair", help="two random scale-1 maps with equal Hopf totals (uses seed)")
    s.add_argument("N", type=int)
    s.add_argument("--out0", default="f0.json")
    s.add_argument("--out1", default="f1.json")
    s.set_defaults(fn=cmd_random_pair)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig.load(args.config) if args.config else RunConfig()
        code, payload, text = args.fn(args, cfg)
    except HopfMismatch as exc:
        code, payload, text = EXIT_HOPF, {"error": "hopf_mismatch", "message": str(exc)}, f"Hopf mismatch: {exc}"
    except MalformedInput as exc:
        code, payload, text = EXIT_MALFORMED, {"error": "malformed", "message": str(exc)}, f"malformed input: {exc}"
    except (HopfLinkError, ValueError) as exc:
        code, payload, text = EXIT_INVALID, {"error": type(exc).__name__, "message": str(exc)}, \
            f"{type(exc).__name__}: {exc}"
    if args.json:
        print(json.dumps(payload, sort_keys=True))
    else:
        print(text, file=sys.stdout if code == EXIT_OK else sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
