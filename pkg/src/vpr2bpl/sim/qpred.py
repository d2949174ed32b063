"""Non-local definedness predicates and their propagation checks.

When the encoding of an exhale or inhale omits the per-expression
well-definedness asserts (as it does at call sites, where the callee's own
specification-wellformedness check discharges them), the simulation goals are
relativised to a predicate ``Q`` restricting the input states:

* ``q-exh`` (for check-and-remove passes over a pair ``(ev, red)``): some
  permission extension ``si`` of the reduction state, staying below the
  evaluation state, inhales the assertion without failing.  Failures of
  ``inhale`` are anti-monotone in the mask, so such a witness rules out
  ill-definedness during the exhale.
* ``q-inh`` (for inhales over a single state): inhaling the assertion from
  the state itself does not fail.  The existential form over smaller states
  is equivalent because non-failure is preserved upward in the mask order.

Both predicates must be re-established for the sub-assertions as a
decomposition rule splits a connective; :func:`check_q_propagation` verifies
those side conditions by bounded enumeration.  :func:`inversion_holds` states
the exhale/inhale inversion property that justifies ``q-exh``: a successful
check-and-remove pass, combined with a non-failing witness, determines a
successful inhale of the removed permissions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional, Tuple

from ..common import Bounds, FrozenMap, MalformedProgramError, PairBudget
from ..viper.ast import CondAssert, Implies, Sep, VAssert
from ..viper.eval import IllDefined, VCtx, eval_bool
from ..viper.semantics import _exhale_aux1, _inhale1
from ..viper.state import FAILURE, Normal, ViperState, mask_add, mask_leq, mask_sub
from .relation import StatePair, StateSpace

Q_EXH = "q-exh"
Q_INH = "q-inh"


@dataclass(frozen=True)
class QRef:
    """A definedness predicate instance: kind tag plus the assertion it
    constrains."""

    kind: str  # Q_EXH | Q_INH
    assertion: VAssert

    def __post_init__(self):
        if self.kind not in (Q_EXH, Q_INH):
            raise MalformedProgramError(f"unknown predicate kind {self.kind}")


class QCache:
    """Memoises inhale-failure checks across the many states a bounded
    enumeration visits."""

    def __init__(self, vctx: VCtx):
        self.vctx = vctx
        self._inh_fail: dict = {}

    def inhale_fails(self, a: VAssert, state: ViperState) -> bool:
        key = (a, state)
        try:
            return self._inh_fail[key]
        except KeyError:
            out = _inhale1(self.vctx, a, state) is FAILURE
            self._inh_fail[key] = out
            return out


def _witness_masks(
    gap: FrozenMap, bounds: Bounds
) -> Iterator[FrozenMap]:
    """All masks pointwise between zero and ``gap`` over the bounded
    permission grid."""
    locs = list(gap.keys())
    perms = bounds.perms()
    choices = [[p for p in perms if p <= gap[loc]] for loc in locs]
    for vals in itertools.product(*choices):
        yield FrozenMap(zip(locs, vals))


def q_holds(q: QRef, cache: QCache, bounds: Bounds, tau: StatePair) -> bool:
    ev, red = tau
    if q.kind == Q_INH:
        return not cache.inhale_fails(q.assertion, red)
    # q-exh: a witness extension of the reduction state below the evaluation
    # state from which the assertion inhales without failing.
    if not mask_leq(red.mask, ev.mask):
        return False
    gap = mask_sub(ev.mask, red.mask)
    for wm in _witness_masks(gap, bounds):
        si = ViperState(red.store, red.heap, wm)
        if not cache.inhale_fails(q.assertion, si):
            return True
    return False


# --------------------------------------------------------------------------
# Propagation side conditions
# --------------------------------------------------------------------------

def _pairs(space: StateSpace, paired: bool, budget) -> Iterator[StatePair]:
    for store in space.stores:
        for heap in space.heaps:
            for mask in space.masks:
                red = ViperState(store, heap, mask)
                if not paired:
                    if budget is not None:
                        budget.charge()
                    yield (red, red)
                    continue
                for mask0 in space.masks:
                    if budget is not None:
                        budget.charge()
                    yield (ViperState(store, heap, mask0), red)


def check_q_propagation(
    kind: str,
    connective: str,
    assertion: VAssert,
    space: StateSpace,
    cache: QCache,
    budget: Optional[PairBudget] = None,
) -> Optional[StatePair]:
    """Bounded check that splitting ``assertion`` at its top connective
    preserves the predicate: the left part satisfies it wherever the whole
    does, and (for separating conjunction) every successful reduction of the
    left part re-establishes it for the right part.  Returns a counterexample
    pair, or ``None`` when the condition holds."""
    vctx = space.vctx
    bounds = space.bounds
    paired = kind == Q_EXH
    whole = QRef(kind, assertion)

    def sub(a: VAssert) -> QRef:
        return QRef(kind, a)

    for tau in _pairs(space, paired, budget):
        ev, red = tau
        if not q_holds(whole, cache, bounds, tau):
            continue
        match assertion, connective:
            case Sep(a1, a2), "sep":
                if not q_holds(sub(a1), cache, bounds, tau):
                    return tau
                if kind == Q_EXH:
                    out = _exhale_aux1(vctx, a1, ev, red)
                    succs = [out.state] if isinstance(out, Normal) else []
                else:
                    out = _inhale1(vctx, a1, red)
                    succs = [out.state] if isinstance(out, Normal) else []
                for red2 in succs:
                    tau2 = (ev, red2) if kind == Q_EXH else (red2, red2)
                    if not q_holds(sub(a2), cache, bounds, tau2):
                        return tau
            case Implies(c, body), "imp":
                try:
                    cv = eval_bool(vctx, ev, c)
                except IllDefined:
                    return tau  # Q must imply the condition is defined
                if cv and not q_holds(sub(body), cache, bounds, tau):
                    return tau
            case CondAssert(c, t, e), "cond":
                try:
                    cv = eval_bool(vctx, ev, c)
                except IllDefined:
                    return tau
                branch = t if cv else e
                if not q_holds(sub(branch), cache, bounds, tau):
                    return tau
            case _:
                raise MalformedProgramError(
                    f"connective {connective!r} does not match {assertion!r}"
                )
    return None


# --------------------------------------------------------------------------
# Inversion property
# --------------------------------------------------------------------------

def inversion_holds(
    vctx: VCtx,
    a: VAssert,
    ev: ViperState,
    red: ViperState,
    si: ViperState,
) -> bool:
    """The exhale/inhale inversion property for one instance.

    Whenever the check-and-remove pass of ``a`` from reduction state ``red``
    (evaluating in ``ev``) succeeds with result ``red'``, and inhaling ``a``
    from the witness ``si`` does not fail, and the combined state
    ``si + (red - red')`` is consistent, then that inhale succeeds and yields
    exactly the combined state.  Vacuously true when a premise fails."""
    out = _exhale_aux1(vctx, a, ev, red)
    if not isinstance(out, Normal):
        return True
    removed = mask_sub(red.mask, out.state.mask)
    combined = ViperState(si.store, si.heap, mask_add(si.mask, removed))
    if not combined.consistent():
        return True
    inh = _inhale1(vctx, a, si)
    if inh is FAILURE:
        return True
    return isinstance(inh, Normal) and inh.state == combined
