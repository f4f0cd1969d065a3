"""Move steps, append-only traces, the cost model and the replay checker.

A trace acts on a *multiset* of signed terms: every step consumes some terms
and produces others. Where summands sit in space is immaterial for the
calculus (rearranging a bounded number of summands costs linear time), so
replay only tracks which terms are present.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from ..errors import HopfMismatch, MalformedInput, MoveError
from . import codec
from .terms import LinkExpression, hopf_invariant


@dataclass(frozen=True)
class CostModel:
    """Constants of the length accounting.

    ``kappa`` is the cost charged per unit of size for one move. ``c_bal`` and
    ``c_cancel`` are the rational ceilings of the two geometric series
    1/(1 - 1/sqrt 2) and 1/(1 - sqrt(5/6)). ``base_threshold`` is the degree
    below which cancellation hands over to a finite certificate table, and
    ``balance_slack`` is the additive constant C of the halving loop.
    """

    kappa: Fraction = Fraction(1)
    c_bal: Fraction = Fraction(7, 2)
    c_cancel: Fraction = Fraction(12)
    base_threshold: int = 64
    balance_slack: int = 4
    small_size: int = 10

    def __post_init__(self):
        for name in ("kappa", "c_bal", "c_cancel"):
            value = Fraction(getattr(self, name))
            if value <= 0:
                raise ValueError(f"{name} must be positive")
            object.__setattr__(self, name, value)
        if self.base_threshold < 1 or self.small_size < 1 or self.balance_slack < 0:
            raise ValueError("thresholds must be positive")

    @property
    def c_geo(self) -> Fraction:
        return Fraction(2)

    @property
    def c_tw(self) -> Fraction:
        return self.c_geo + 2


@dataclass(frozen=True)
class MoveSpec:
    name: str
    apply: Callable  # (consumed, params, model) -> produced, raises MoveError
    cost: Callable  # (consumed, params, model) -> Fraction
    keys: frozenset = frozenset()  # parameter names the move understands


MOVES: dict = {}


def register(name: str, cost: Callable, keys=()):
    """Register a move; parameters outside ``keys`` make an application illegal."""
    allowed = frozenset(keys)

    def deco(fn):
        def apply(consumed, params, model):
            extra = set(params) - allowed
            if extra:
                raise MoveError(f"{name} takes no parameter {sorted(extra)[0]!r}")
            return fn(consumed, params, model)
        MOVES[name] = MoveSpec(name, apply, cost, allowed)
        return fn
    return deco


@dataclass(frozen=True)
class MoveStep:
    move: str
    consumed: tuple
    produced: tuple
    cost: Fraction
    hopf_before: int
    hopf_after: int
    params: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "move": self.move,
            "params": self.params,
            "consumed": codec.terms_to_json(self.consumed),
            "produced": codec.terms_to_json(self.produced),
            "cost": codec.fraction_to_str(self.cost),
            "hopf_before": self.hopf_before,
            "hopf_after": self.hopf_after,
        }

    @classmethod
    def from_json(cls, obj) -> "MoveStep":
        try:
            return cls(
                move=str(obj["move"]),
                consumed=codec.terms_from_json(obj["consumed"]),
                produced=codec.terms_from_json(obj["produced"]),
                cost=codec.fraction_from_str(obj["cost"]),
                hopf_before=int(obj["hopf_before"]),
                hopf_after=int(obj["hopf_after"]),
                params=dict(obj.get("params", {})),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedInput(f"bad move step: {exc}") from exc


def make_step(move: str, consumed, params=None, model: Optional[CostModel] = None) -> MoveStep:
    """Apply a registered move and package the result as a checked step."""
    model = model or CostModel()
    params = dict(params or {})
    spec = MOVES[move]
    consumed = tuple(consumed)
    produced = tuple(spec.apply(consumed, params, model))
    before, after = hopf_invariant(consumed), hopf_invariant(produced)
    if before != after:
        raise HopfMismatch(f"move {move} changed the Hopf invariant {before} -> {after}")
    return MoveStep(move, consumed, produced, Fraction(spec.cost(consumed, params, model)),
                    before, after, params)


class MoveTrace:
    """Append-only log of move steps."""

    def __init__(self, steps=()):
        self._steps = list(steps)

    @property
    def steps(self) -> tuple:
        return tuple(self._steps)

    @property
    def total_cost(self) -> Fraction:
        return sum((s.cost for s in self._steps), Fraction(0))

    def append(self, step: MoveStep) -> MoveStep:
        self._steps.append(step)
        return step

    def extend(self, other: "MoveTrace") -> None:
        self._steps.extend(other.steps)

    def record(self, move: str, consumed, params=None, model=None) -> tuple:
        """Run a move, log it and return the produced terms."""
        return self.append(make_step(move, consumed, params, model)).produced

    def __len__(self):
        return len(self._steps)

    def __iter__(self):
        return iter(self._steps)

    def __eq__(self, other):
        return isinstance(other, MoveTrace) and self.steps == other.steps

    def to_json(self) -> dict:
        return {"steps": [s.to_json() for s in self._steps],
                "total_cost": codec.fraction_to_str(self.total_cost)}

    @classmethod
    def from_json(cls, obj) -> "MoveTrace":
        if not isinstance(obj, dict) or not isinstance(obj.get("steps"), list):
            raise MalformedInput("trace JSON needs a 'steps' list")
        trace = cls(MoveStep.from_json(s) for s in obj["steps"])
        if "total_cost" in obj and codec.fraction_from_str(obj["total_cost"]) != trace.total_cost:
            raise MalformedInput("declared total_cost differs from the sum of step costs")
        return trace


@dataclass(frozen=True)
class TraceReport:
    ok: bool
    step: Optional[int] = None
    check: Optional[str] = None  # "a" legality, "b" Hopf, "c" cost, "d" endpoints
    message: str = ""

    def __bool__(self):
        return self.ok


def verify_trace(initial: LinkExpression, trace: MoveTrace, final: LinkExpression,
                 model: Optional[CostModel] = None) -> TraceReport:
    """Replay ``trace`` from ``initial`` and check it lands on ``final``."""
    model = model or CostModel()
    state = Counter(initial.terms)
    hopf = hopf_invariant(initial)
    for k, step in enumerate(trace.steps):
        spec = MOVES.get(step.move)
        if spec is None:
            return TraceReport(False, k, "a", f"unknown move {step.move!r}")
        need = Counter(step.consumed)
        if any(state[t] < c for t, c in need.items()):
            return TraceReport(False, k, "a", "consumed terms are not present in the state")
        try:
            expected = tuple(spec.apply(step.consumed, dict(step.params), model))
        except Exception as exc:  # any failure of the move on these inputs makes the step illegal
            return TraceReport(False, k, "a", f"illegal {step.move}: {exc}")
        if expected != step.produced:
            return TraceReport(False, k, "a", f"{step.move} does not produce the recorded terms")
        if not (step.hopf_before == hopf_invariant(step.consumed) == hopf_invariant(step.produced)
                == step.hopf_after):
            return TraceReport(False, k, "b", "Hopf invariant not conserved by the step")
        try:
            cost = Fraction(spec.cost(step.consumed, dict(step.params), model))
        except Exception as exc:
            return TraceReport(False, k, "c", f"cost undefined: {exc}")
        if cost != step.cost:
            return TraceReport(False, k, "c", f"declared cost {step.cost} != model cost {cost}")
        state -= need
        state.update(step.produced)
    if hopf_invariant(final) != hopf:
        return TraceReport(False, None, "b", "endpoints carry different Hopf invariants")
    if state != Counter(final.terms):
        return TraceReport(False, None, "d", "replayed state does not match the final expression")
    return TraceReport(True)


def negate_trace(trace: MoveTrace, model: Optional[CostModel] = None) -> MoveTrace:
    """The same moves applied to the negated terms (every move is sign-symmetric)."""
    model = model or CostModel()
    out = MoveTrace()
    for step in trace.steps:
        params = dict(step.params)
        if step.move == "insert_pair":
            terms = codec.terms_from_json(params["terms"])
            params["terms"] = codec.terms_to_json(tuple(t.negated() for t in terms))
        if step.move == "create_null":
            params["sign"] = -int(params.get("sign", 1))
        new = make_step(step.move, tuple(t.negated() for t in step.consumed), params, model)
        if Counter(new.produced) != Counter(t.negated() for t in step.produced):
            raise MoveError(f"move {step.move} is not sign-symmetric here")
        out.append(new)
    return out
