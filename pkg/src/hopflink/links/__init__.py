"""Symbolic Hopf-link expressions and their cost-charged homotopy moves."""
from .terms import (BalancedLink, Interlocked, LinkExpression, SignedTerm, Standard, Twisted, Unit,
                    balanced_for_hopf, hopf_invariant, neg, pos, size)
from .trace import CostModel, MoveStep, MoveTrace, TraceReport, negate_trace, verify_trace, MOVES
from . import moves
from .moves import absorb_units, merge_parallel, shift_double, transfer_unit
from .balance import balance
from .cancel import CancelStats, cancel, rebalance
from .arith import add_balanced, represent_hopf
from .interlocked import (interlocked_to_balanced, split_interlocked_step, twisted_to_balanced,
                          twisted_to_interlocked)
