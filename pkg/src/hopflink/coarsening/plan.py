"""One coarsening step and the full ladder between two cubical maps.

Blocks of one step run in parallel, so a step lasts as long as its slowest
block; the recorded trace is still the concatenation of all block traces in
cell order (each starts and ends empty). A plan coarsens both maps to the
top cell, where the two remaining links are cancelled.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from ..errors import HopfMismatch, PreconditionError
from ..links.cancel import cancel
from ..links.codec import fraction_to_str
from ..links.trace import CostModel, MoveTrace, negate_trace
from .clutching import build_clutching, null_homotopy_clutching
from .cubical import C_DEG, CubicalMap, coarse_map, validate_map
from .templates import default_table


class ValidationFailed(PreconditionError):
    def __init__(self, report):
        super().__init__(f"{report.check} violation at {report.where}: {report.message}")
        self.report = report


def threads(default: int = 1) -> int:
    try:
        return max(1, int(os.environ.get("HF_THREADS", default)))
    except ValueError:
        return default


@dataclass
class StepResult:
    coarse: CubicalMap
    trace: MoveTrace | None
    block_costs: dict = field(default_factory=dict)  # coarse cell -> cost

    @property
    def cost(self) -> Fraction:
        return max(self.block_costs.values(), default=Fraction(0))

    def __iter__(self):
        return iter((self.coarse, self.trace))


def _block(args):
    m, B, cm, model, keep = args
    t = null_homotopy_clutching(build_clutching(m, B, cm), model)
    return B, t.total_cost, (t if keep else None)


def coarsen_step(m: CubicalMap, model: CostModel | None = None, c_deg: int = C_DEG, workers: int | None = None,
                 keep_trace: bool = True, check: bool = True) -> StepResult:
    """Coarsen ``m`` by one level; the trace null-homotopes every block's clutching."""
    model = model or CostModel()
    if check:
        rep = validate_map(m, c_deg)
        if not rep:
            raise ValidationFailed(rep)
    if m.level >= m.N:
        raise PreconditionError("map is already a single cell")
    cm = coarse_map(m)
    blocks = sorted(set(tuple(x // 2 for x in c) for c in m.active_cells()))
    workers = threads() if workers is None else workers
    jobs = [(m, B, cm, model, keep_trace) for B in blocks]
    if workers > 1 and len(jobs) > 64:
        default_table()
        with ProcessPoolExecutor(workers) as ex:
            results = list(ex.map(_run_chunk, _chunks(jobs, workers * 4)))
        results = [r for chunk in results for r in chunk]
    else:
        results = [_block(j) for j in jobs]
    trace = MoveTrace() if keep_trace else None
    costs = {}
    for B, cost, t in results:
        costs[B] = cost
        if keep_trace:
            trace.extend(t)
    assert cm.hopf_total == m.hopf_total
    return StepResult(cm, trace, costs)


def _chunks(jobs, k):
    size = max(1, -(-len(jobs) // k))
    m, model, keep = jobs[0][0], jobs[0][3], jobs[0][4]
    cm = jobs[0][2]
    return [(m, cm, model, keep, [j[1] for j in jobs[i:i + size]]) for i in range(0, len(jobs), size)]


def _run_chunk(chunk):
    m, cm, model, keep, blocks = chunk
    return [_block((m, B, cm, model, keep)) for B in blocks]


@dataclass
class PlanReport:
    N: int
    f0_costs: list  # per level
    f1_costs: list
    cancel_cost: Fraction
    traces: list = field(default_factory=list)  # per level: f0 step, f1 step; then the final cancel
    hopf_total: int = 0

    @property
    def level_costs(self) -> list:
        return [a + b for a, b in zip(self.f0_costs, self.f1_costs)] + [self.cancel_cost]

    @property
    def total_cost(self) -> Fraction:
        return sum(self.level_costs, Fraction(0))

    @property
    def ratios(self) -> list:
        """cost(level + 1) / cost(level) over the coarsening levels."""
        c = self.level_costs[:-1]
        return [Fraction(b, a) if a else None for a, b in zip(c, c[1:])]

    @property
    def fitted_ratio(self):
        """exp of the least-squares slope of log cost against level (nonzero levels)."""
        pts = [(i, math.log(c)) for i, c in enumerate(self.level_costs[:-1]) if c > 0]
        if len(pts) < 2:
            return None
        mx = sum(p[0] for p in pts) / len(pts)
        my = sum(p[1] for p in pts) / len(pts)
        num = sum((x - mx) * (y - my) for x, y in pts)
        den = sum((x - mx) ** 2 for x, _ in pts)
        return math.exp(num / den)

    @property
    def linear(self) -> bool:
        r = self.ratios
        return all(x is not None and Fraction(3, 2) <= x <= Fraction(5, 2) for x in r)

    def to_json(self) -> dict:
        q = fraction_to_str
        return {"N": self.N, "hopf_total": self.hopf_total,
                "level_costs": [q(c) for c in self.level_costs],
                "f0_costs": [q(c) for c in self.f0_costs], "f1_costs": [q(c) for c in self.f1_costs],
                "cancel_cost": q(self.cancel_cost), "total_cost": q(self.total_cost),
                "ratios": [q(r) if r is not None else None for r in self.ratios],
                "fitted_ratio": self.fitted_ratio, "linear": self.linear}


def final_cancel(l0, l1, model) -> MoveTrace:
    """Trace taking ``l0 - l1`` (two signed top links) to nothing."""
    if l0.hopf != l1.hopf:
        raise HopfMismatch(f"top links carry {l0.hopf} and {l1.hopf}")
    if l0.sign == l1.sign:
        t = cancel(l0.link, l1.link, model)
        return t if l0.sign > 0 else negate_trace(t, model)
    # only +(-1 unit) against -(+1 unit) differ in sign with equal invariants
    return cancel(l0.link, l1.link, model)


def plan_homotopy(f0: CubicalMap, f1: CubicalMap, model: CostModel | None = None, c_deg: int = C_DEG,
                  workers: int | None = None, keep_traces: bool = True) -> PlanReport:
    model = model or CostModel()
    if f0.N != f1.N or f0.level or f1.level:
        raise PreconditionError("both maps must be scale-1 maps on the same grid")
    for m in (f0, f1):
        rep = validate_map(m, c_deg)
        if not rep:
            raise ValidationFailed(rep)
    if f0.hopf_total != f1.hopf_total:
        raise HopfMismatch(f"maps are not homotopic: Hopf totals {f0.hopf_total} and {f1.hopf_total}")
    costs = ([], [])
    traces = []
    cur = [f0, f1]
    for level in range(f0.N):
        pair = []
        for side in (0, 1):
            res = coarsen_step(cur[side], model, c_deg, workers, keep_traces, check=False)
            costs[side].append(res.cost)
            cur[side] = res.coarse
            pair.append(res.trace)
        traces.append(pair)
    top = (0, 0, 0)
    t = final_cancel(cur[0].link(top), cur[1].link(top), model)
    traces.append(t if keep_traces else None)
    return PlanReport(f0.N, costs[0], costs[1], t.total_cost, traces if keep_traces else [], f0.hopf_total)
