"""Simulation goals and their Viper-side success/failure semantics.

A goal claims that, between two program points of the generated procedure,
every behaviour of a Viper subject is matched by the Boogie code: successful
reductions reach the end point in a related state, and failures are matched
by some failing Boogie execution.  The subject determines the transition
relation via :func:`derive_succ_fail`:

* ``stm``     -- a statement, reduced by the big-step semantics;
* ``wf``      -- a tuple of expressions; success is their definedness in the
                 evaluation state, failure is any ill-definedness;
* ``rc``      -- an assertion reduced by the check-and-remove pass, over
                 state pairs (optionally relativised by a ``QRef``);
* ``bsim``    -- a Boogie-only segment: identity success, no failure;
* ``generic`` -- an explicit tagged subject: the permission-checked *effect*
                 of an assignment (ill-definedness contributes no behaviour,
                 it is covered by a preceding ``wf`` goal), the *nondet*
                 heap selection that ends an exhale, or a *havoc* of call
                 targets.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import List, Optional, Tuple

from ..common import Bounds, MalformedProgramError, PairBudget
from ..viper import ast as V
from ..viper.eval import IllDefined, VCtx, eval_expr, eval_ref
from ..viper.semantics import _exhale_aux1, exec_stmt, non_det_select
from ..viper.state import FAILURE, Normal, ViperState, type_domain
from ..translate.hints import Cursor
from .qpred import QRef
from .relation import SR, RelationSpec, StatePair

GOAL_KINDS = ("stm", "wf", "rc", "bsim", "generic")


@dataclass(frozen=True)
class SimulationGoal:
    kind: str
    subject: object
    r_in: RelationSpec
    r_out: RelationSpec
    start: Cursor
    end: Cursor
    q: Optional[QRef] = None

    def __post_init__(self):
        if self.kind not in GOAL_KINDS:
            raise MalformedProgramError(f"unknown goal kind {self.kind}")


def eval_state_of(goal: SimulationGoal, tau: StatePair) -> ViperState:
    """Which pair component expressions of this goal evaluate in."""
    ev, red = tau
    if isinstance(goal.r_in, SR) and goal.r_in.paired:
        return ev
    return red


def derive_succ_fail(
    goal: SimulationGoal,
    vctx: VCtx,
    bounds: Bounds,
    tau: StatePair,
    budget: Optional[PairBudget] = None,
) -> Tuple[List[StatePair], bool]:
    """Successor pairs and whether the subject can fail, from ``tau``.
    Pruned (magic) outcomes contribute nothing."""
    ev, red = tau
    match goal.kind:
        case "bsim":
            return [tau], False
        case "stm":
            succs: List[StatePair] = []
            fails = False
            for out in exec_stmt(vctx, goal.subject, red, bounds, budget):
                if isinstance(out, Normal):
                    succs.append((out.state, out.state))
                elif out is FAILURE:
                    fails = True
            return succs, fails
        case "wf":
            st = eval_state_of(goal, tau)
            for e in goal.subject:
                try:
                    eval_expr(vctx, st, e)
                except IllDefined:
                    return [], True
            return [tau], False
        case "rc":
            out = _exhale_aux1(vctx, goal.subject, ev, red)
            if isinstance(out, Normal):
                return [(ev, out.state)], False
            return [], True
        case "generic":
            return _derive_generic(goal, vctx, bounds, tau, budget)
    raise MalformedProgramError(f"unknown goal kind {goal.kind}")


def _derive_generic(goal, vctx, bounds, tau, budget):
    ev, red = tau
    tag = goal.subject[0]
    if tag == "effect":
        return _derive_effect(goal.subject[1], vctx, bounds, red, budget)
    if tag == "nondet":
        a = goal.subject[1]
        out = _exhale_aux1(vctx, a, ev, ev)
        if not (isinstance(out, Normal) and out.state == red):
            return [], False
        sel = non_det_select(vctx, ev, red, bounds, budget)
        return [(ev, s) for s in sel], False
    if tag == "havoc":
        targets = goal.subject[1]
        domains = [type_domain(vctx.var_type(t), bounds) for t in targets]
        succs = []
        for vals in itertools.product(*domains):
            if budget is not None:
                budget.charge()
            s = red.set_var_many(targets, vals) if targets else red
            succs.append((s, s))
        return succs, False
    raise MalformedProgramError(f"unknown generic subject {tag!r}")


def _derive_effect(s: V.VStmt, vctx: VCtx, bounds: Bounds, state, budget):
    """The permission-checked effect of an assignment, assuming its
    subexpressions are defined.  Ill-definedness yields no behaviour here:
    it is the preceding well-definedness goal's failure."""
    match s:
        case V.LocalAssign(x, rhs):
            try:
                v = eval_expr(vctx, state, rhs)
            except IllDefined:
                return [], False
            st = state.set_var(x, v)
            return [(st, st)], False
        case V.FieldAssign(rcv, f, rhs):
            try:
                r = eval_ref(vctx, state, rcv)
                v = eval_expr(vctx, state, rhs)
            except IllDefined:
                return [], False
            if state.perm_at((r, f)) != 1:
                return [], True
            st = state.set_heap((r, f), v)
            return [(st, st)], False
        case V.VarDecl(x, t):
            succs = []
            for v in type_domain(t, bounds):
                if budget is not None:
                    budget.charge()
                st = state.set_var(x, v)
                succs.append((st, st))
            return succs, False
    raise MalformedProgramError(f"no effect semantics for {s!r}")
