"""Bounded-exhaustive oracle discharging leaf simulation goals.

A leaf goal is checked directly against both semantics: for every related
input state pair within the bounds, the Viper-side successors and failure
possibilities of the subject are derived, the canonical Boogie assignment is
built, and all Boogie executions between the goal's two program points are
explored.  The goal holds when every Viper failure is matched by some failing
Boogie execution and every Viper successor is observed, related, at the end
point.  Counterexamples are shrunk greedily towards default values before
being reported.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from ..common import Bounds, FrozenMap, PairBudget
from ..viper import ast as V
from ..viper.eval import VCtx
from ..viper.state import ViperState, type_default
from ..boogie.ast import BProc, BProgram
from ..boogie.interp import BCtx, UnassignedVar, canonical_interpretation
from ..boogie.semantics import resolve_cursor, run
from ..translate.hints import TranslationRecord
from ..sim import (
    FieldEnc,
    QCache,
    RuleEnv,
    SimulationGoal,
    StatePair,
    StateSpace,
    derive_succ_fail,
    encode_state,
    enumerate_tau,
    pair_constraints_ok,
    project_state,
    q_holds,
)


@dataclass(frozen=True)
class Counterexample:
    """A related input pair on which the Boogie code under-approximates the
    Viper subject."""

    tau: StatePair
    reason: str  # "missed-failure" | "missed-success" | "unassigned-read"
    detail: object = None


class MethodContext:
    """Shared per-method checking state: semantic contexts for both sides and
    the caches the bounded enumerations lean on."""

    def __init__(
        self,
        program: V.Program,
        bprogram: BProgram,
        method: V.Method,
        proc: BProc,
        record: TranslationRecord,
        bounds: Bounds,
        budget: Optional[PairBudget] = None,
        bctx: Optional[BCtx] = None,
    ):
        self.program = program
        self.bprogram = bprogram
        self.method = method
        self.proc = proc
        self.record = record
        self.bounds = bounds
        self.budget = budget
        self.space = StateSpace(program, method, bounds)
        self.vctx = self.space.vctx
        self.qcache = QCache(self.vctx)
        self.fenc = FieldEnc(record, self.vctx)
        self.bctx = bctx if bctx is not None else canonical_interpretation(
            bprogram, bounds
        )
        self.rule_env = RuleEnv(program, method, self.vctx, proc)


def oracle_check(
    goal: SimulationGoal, mc: MethodContext
) -> Optional[Counterexample]:
    """Check one goal exhaustively; ``None`` when it holds."""
    start_pt = resolve_cursor(mc.proc.body, goal.start)
    end_pt = resolve_cursor(mc.proc.body, goal.end)
    for tau in enumerate_tau(goal.r_in, mc.space, mc.budget):
        cx = _check_one(goal, mc, tau, start_pt, end_pt)
        if cx is not None:
            return _shrink(goal, mc, cx, start_pt, end_pt)
    return None


def _check_one(
    goal: SimulationGoal, mc: MethodContext, tau: StatePair, start_pt, end_pt
) -> Optional[Counterexample]:
    if goal.q is not None and not q_holds(goal.q, mc.qcache, mc.bounds, tau):
        return None
    succs, fails = derive_succ_fail(goal, mc.vctx, mc.bounds, tau, mc.budget)
    if not succs and not fails:
        return None  # only pruned outcomes: nothing to match
    st = encode_state(goal.r_in, mc.fenc, tau)
    try:
        rr = run(mc.bctx, start_pt, st, target=end_pt,
                 budget=mc.budget, scope=mc.proc)
        if fails and not rr.failed:
            # The matching failure must lie within the goal's span: a failure
            # past the end point belongs to a different goal, and crediting it
            # here would let an unrelated downstream assert mask a missing
            # check.
            return Counterexample(tau, "missed-failure")
        if succs:
            reached = {project_state(goal.r_out, s) for s in rr.at_target}
            reached.discard(None)
            for tau2 in succs:
                if encode_state(goal.r_out, mc.fenc, tau2) not in reached:
                    return Counterexample(tau, "missed-success", tau2)
    except UnassignedVar as exc:
        return Counterexample(tau, "unassigned-read", exc.name)
    return None


# --------------------------------------------------------------------------
# Counterexample shrinking
# --------------------------------------------------------------------------

def _shrink(
    goal: SimulationGoal, mc: MethodContext, cx: Counterexample,
    start_pt, end_pt,
) -> Counterexample:
    """Greedily move the counterexample's components towards defaults while
    it still witnesses a violation."""
    ftypes = mc.program.field_map()

    def still_fails(tau: StatePair) -> Optional[Counterexample]:
        if not pair_constraints_ok(goal.r_in, tau):
            return None
        return _check_one(goal, mc, tau, start_pt, end_pt)

    best = cx
    progress = True
    while progress:
        progress = False
        ev, red = best.tau
        for cand in _simpler(mc.vctx, ftypes, ev, red):
            smaller = still_fails(cand)
            if smaller is not None:
                best, progress = smaller, True
                break
    return best


def _simpler(vctx: VCtx, ftypes, ev: ViperState, red: ViperState):
    """One-step simplifications of a state pair: a store variable to its type
    default, a heap value to its type default (in both components, which share
    the heap), or a mask entry to zero."""
    for x, t in vctx.var_types:
        d = type_default(t)
        if red.store[x] != d:
            yield (ev.set_var(x, d), red.set_var(x, d))
    for (r, f), v in red.heap.items():
        d = type_default(ftypes[f])
        if v != d:
            yield (ev.set_heap((r, f), d), red.set_heap((r, f), d))
    zero = Fraction(0)
    diagonal = ev == red
    for loc, p in red.mask.items():
        if p != zero:
            yield (red.set_mask(loc, zero) if diagonal else ev,
                   red.set_mask(loc, zero))
    if not diagonal:
        for loc, p in ev.mask.items():
            if p != zero:
                yield (ev.set_mask(loc, zero), red)
