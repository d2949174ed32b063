"""Big-step semantics for the Viper subset.

Execution is set-valued over three outcomes: ``Normal`` states, ``Failure``
(a verification error), and ``Magic`` (an assumption became inconsistent and
the trace is pruned).  Nondeterminism comes from three sources, all enumerated
over the finite bounds: variable declarations, method-call result values, and
the heap values of locations that lose all permission during an exhale.

``exhale`` of an assertion first runs a deterministic check-and-remove pass
(:func:`exhale_aux`) that evaluates every expression in the pre-exhale state
while threading a separate reduction state through the conjuncts, then havocs
the heap at fully-relinquished locations (:func:`non_det_select`).
"""

from __future__ import annotations

import itertools
from typing import Iterable, Iterator, Optional

from ..common import Bounds, FrozenMap, MalformedProgramError, PairBudget
from .ast import (
    Acc, CondAssert, Exhale, FieldAssign, If, Implies, Inhale, Lit,
    LocalAssign, Method, MethodCall, NULL, Program, Pure, Sep, Seq, Skip,
    Var, VarDecl, VAssert, VAssertStmt, VStmt, VType, mentioned_fields,
)
from .eval import IllDefined, VCtx, eval_bool, eval_expr, eval_perm, eval_ref, make_ctx
from .state import (
    FAILURE, MAGIC, Normal, ViperState, VOutcome, default_heap, type_domain, zero_mask,
)

Outcomes = frozenset


def inhale(ctx: VCtx, a: VAssert, state: ViperState) -> frozenset[VOutcome]:
    """Deterministic inhale; always a singleton outcome set."""
    return frozenset({_inhale1(ctx, a, state)})


def _inhale1(ctx: VCtx, a: VAssert, state: ViperState) -> VOutcome:
    match a:
        case Pure(e):
            try:
                v = eval_bool(ctx, state, e)
            except IllDefined:
                return FAILURE
            return Normal(state) if v else MAGIC
        case Acc(rcv, f, perm):
            try:
                r = eval_ref(ctx, state, rcv)
                p = eval_perm(ctx, state, perm)
            except IllDefined:
                return FAILURE
            if p < 0:
                return FAILURE
            if r == NULL:
                return MAGIC if p > 0 else Normal(state)
            new_p = state.mask[(r, f)] + p
            if new_p > 1:
                return MAGIC
            return Normal(state.set_mask((r, f), new_p))
        case Sep(left, right):
            out = _inhale1(ctx, left, state)
            if not isinstance(out, Normal):
                return out
            return _inhale1(ctx, right, out.state)
        case Implies(cond, body):
            try:
                c = eval_bool(ctx, state, cond)
            except IllDefined:
                return FAILURE
            return _inhale1(ctx, body, state) if c else Normal(state)
        case CondAssert(cond, then_a, else_a):
            try:
                c = eval_bool(ctx, state, cond)
            except IllDefined:
                return FAILURE
            return _inhale1(ctx, then_a if c else else_a, state)
    raise MalformedProgramError(f"bad assertion node: {a!r}")


def exhale_aux(
    ctx: VCtx, a: VAssert, eval_state: ViperState, red_state: ViperState
) -> frozenset[VOutcome]:
    """Check-and-remove pass: expressions evaluate in ``eval_state`` while
    permissions are removed from the threaded ``red_state``.  Deterministic;
    always a singleton set of ``Normal`` or ``Failure``."""
    return frozenset({_exhale_aux1(ctx, a, eval_state, red_state)})


def _exhale_aux1(
    ctx: VCtx, a: VAssert, ev: ViperState, red: ViperState
) -> VOutcome:
    match a:
        case Pure(e):
            try:
                v = eval_bool(ctx, ev, e)
            except IllDefined:
                return FAILURE
            return Normal(red) if v else FAILURE
        case Acc(rcv, f, perm):
            try:
                r = eval_ref(ctx, ev, rcv)
                p = eval_perm(ctx, ev, perm)
            except IllDefined:
                return FAILURE
            if p < 0:
                return FAILURE
            if r == NULL:
                return Normal(red) if p == 0 else FAILURE
            if red.mask[(r, f)] >= p:
                return Normal(red.set_mask((r, f), red.mask[(r, f)] - p))
            return FAILURE
        case Sep(left, right):
            out = _exhale_aux1(ctx, left, ev, red)
            if not isinstance(out, Normal):
                return out
            return _exhale_aux1(ctx, right, ev, out.state)
        case Implies(cond, body):
            try:
                c = eval_bool(ctx, ev, cond)
            except IllDefined:
                return FAILURE
            return _exhale_aux1(ctx, body, ev, red) if c else Normal(red)
        case CondAssert(cond, then_a, else_a):
            try:
                c = eval_bool(ctx, ev, cond)
            except IllDefined:
                return FAILURE
            return _exhale_aux1(ctx, then_a if c else else_a, ev, red)
    raise MalformedProgramError(f"bad assertion node: {a!r}")


def non_det_select(
    ctx: VCtx,
    orig: ViperState,
    after: ViperState,
    bounds: Bounds,
    budget: Optional[PairBudget] = None,
) -> frozenset[ViperState]:
    """All post-exhale states: the store and mask of ``after``, with the heap
    havocked over the bounded value domain at every location that lost all
    permission (positive in ``orig``, zero in ``after``), preserved elsewhere."""
    lost = [
        loc for loc in after.locations()
        if orig.mask[loc] > 0 and after.mask[loc] == 0
    ]
    if not lost:
        return frozenset({after})
    out = set()
    domains = [type_domain(ctx.field_type(f), bounds) for (_, f) in lost]
    for values in itertools.product(*domains):
        if budget is not None:
            budget.charge()
        out.add(
            ViperState(after.store, after.heap.set_many(zip(lost, values)), after.mask)
        )
    return frozenset(out)


def _exhale_stmt(
    ctx: VCtx, a: VAssert, state: ViperState, bounds: Bounds, budget: Optional[PairBudget]
) -> frozenset[VOutcome]:
    out = _exhale_aux1(ctx, a, state, state)
    if not isinstance(out, Normal):
        return frozenset({out})
    return frozenset(
        Normal(s) for s in non_det_select(ctx, state, out.state, bounds, budget)
    )


def exec_stmt(
    ctx: VCtx,
    s: VStmt,
    state: ViperState,
    bounds: Bounds,
    budget: Optional[PairBudget] = None,
) -> frozenset[VOutcome]:
    match s:
        case Skip():
            return frozenset({Normal(state)})
        case LocalAssign(var, rhs):
            try:
                v = eval_expr(ctx, state, rhs)
            except IllDefined:
                return frozenset({FAILURE})
            return frozenset({Normal(state.set_var(var, v))})
        case FieldAssign(rcv, f, rhs):
            try:
                r = eval_ref(ctx, state, rcv)
                v = eval_expr(ctx, state, rhs)
            except IllDefined:
                return frozenset({FAILURE})
            if state.perm_at((r, f)) != 1:
                return frozenset({FAILURE})
            return frozenset({Normal(state.set_heap((r, f), v))})
        case VarDecl(var, vtype):
            out = set()
            for v in type_domain(vtype, bounds):
                if budget is not None:
                    budget.charge()
                out.add(Normal(state.set_var(var, v)))
            return frozenset(out)
        case Inhale(a):
            return inhale(ctx, a, state)
        case Exhale(a):
            return _exhale_stmt(ctx, a, state, bounds, budget)
        case VAssertStmt(a):
            out = _exhale_aux1(ctx, a, state, state)
            if not isinstance(out, Normal):
                return frozenset({out})
            return frozenset({Normal(state)})
        case If(cond, then_s, else_s):
            try:
                c = eval_bool(ctx, state, cond)
            except IllDefined:
                return frozenset({FAILURE})
            return exec_stmt(ctx, then_s if c else else_s, state, bounds, budget)
        case Seq(first, second):
            results: set[VOutcome] = set()
            for out in exec_stmt(ctx, first, state, bounds, budget):
                if isinstance(out, Normal):
                    results |= exec_stmt(ctx, second, out.state, bounds, budget)
                else:
                    results.add(out)
            return frozenset(results)
        case MethodCall(targets, name, args):
            return _exec_call(ctx, targets, name, args, state, bounds, budget)
    raise MalformedProgramError(f"bad statement node: {s!r}")


def call_spec_substitution(ctx: VCtx, call: MethodCall) -> tuple[VAssert, VAssert]:
    """Callee pre/post with formals replaced by argument expressions and
    return formals replaced by the call targets."""
    callee = ctx.program.method(call.method)
    if len(call.args) != len(callee.params) or len(call.targets) != len(callee.returns):
        raise MalformedProgramError(f"arity mismatch calling {call.method}")
    sub = {formal: arg for (formal, _), arg in zip(callee.params, call.args)}
    pre_s = _subst(callee.pre, sub)
    sub_post = dict(sub)
    for (formal, _), tgt in zip(callee.returns, call.targets):
        sub_post[formal] = Var(tgt)
    post_s = _subst(callee.post, sub_post)
    return pre_s, post_s


def _subst(a: VAssert, sub):
    from .ast import subst_assert

    return subst_assert(a, sub)


def _exec_call(
    ctx: VCtx,
    targets,
    name: str,
    args,
    state: ViperState,
    bounds: Bounds,
    budget: Optional[PairBudget],
) -> frozenset[VOutcome]:
    pre_s, post_s = call_spec_substitution(
        ctx, MethodCall(tuple(targets), name, tuple(args))
    )
    results: set[VOutcome] = set()
    for out in _exhale_stmt(ctx, pre_s, state, bounds, budget):
        if not isinstance(out, Normal):
            results.add(out)
            continue
        domains = [type_domain(ctx.var_type(t), bounds) for t in targets]
        for values in itertools.product(*domains):
            if budget is not None:
                budget.charge()
            mid = out.state.set_var_many(targets, values) if targets else out.state
            results |= inhale(ctx, post_s, mid)
    return frozenset(results)


# --------------------------------------------------------------------------
# Method-level correctness
# --------------------------------------------------------------------------

def method_root_stmt(m: Method) -> VStmt:
    return Seq(Inhale(m.pre), Seq(m.body, Exhale(m.post)))


def initial_states(
    program: Program, m: Method, bounds: Bounds, enumerate_returns: bool = True
) -> Iterator[ViperState]:
    """All zero-mask initial states: parameter (and optionally return) stores
    over the bounded domains, heaps over the bounded domains at every location
    of a field the method can observe, all-zero mask.  With
    ``enumerate_returns=False`` the return variables hold type defaults."""
    from .state import type_default

    fields = mentioned_fields(program, m)
    ftypes = program.field_map()
    mask = zero_mask(fields, bounds)
    base_heap = default_heap(ftypes, fields, bounds)
    locs = sorted(base_heap.keys(), key=repr)
    io_vars = list(m.params)
    fixed = {}
    if enumerate_returns:
        io_vars += list(m.returns)
    else:
        fixed = {n: type_default(t) for n, t in m.returns}
    store_domains = [type_domain(t, bounds) for _, t in io_vars]
    heap_domains = [type_domain(ftypes[f], bounds) for (_, f) in locs]
    for store_vals in itertools.product(*store_domains):
        store = FrozenMap({**fixed, **{n: v for (n, _), v in zip(io_vars, store_vals)}})
        for heap_vals in itertools.product(*heap_domains):
            heap = FrozenMap(dict(zip(locs, heap_vals)))
            yield ViperState(store, heap, mask)


def method_correct(
    program: Program,
    m: Method,
    bounds: Bounds,
    budget: Optional[PairBudget] = None,
) -> tuple[bool, Optional[ViperState]]:
    """True when executing ``inhale pre; body; exhale post`` never fails from
    any bounded zero-mask initial state; otherwise a witness initial state."""
    ctx = make_ctx(program, m)
    root = method_root_stmt(m)
    for init in initial_states(program, m, bounds):
        if budget is not None:
            budget.charge()
        if FAILURE in exec_stmt(ctx, root, init, bounds, budget):
            return False, init
    return True, None


def spec_well_formed(
    program: Program,
    m: Method,
    bounds: Bounds,
    budget: Optional[PairBudget] = None,
) -> tuple[bool, Optional[str]]:
    """Checks both halves of specification well-formedness: inhaling the
    precondition never fails from a zero-mask state, and inhaling the
    postcondition never fails after inhaling the precondition and assigning
    arbitrary bounded values to the return variables."""
    ctx = make_ctx(program, m)
    ret_domains = [type_domain(t, bounds) for _, t in m.returns]
    ret_names = [n for n, _ in m.returns]
    for init in initial_states(program, m, bounds, enumerate_returns=False):
        if budget is not None:
            budget.charge()
        out = _inhale1(ctx, m.pre, init)
        if out is FAILURE:
            return False, f"inhaling the precondition of {m.name} fails from {init}"
        if not isinstance(out, Normal):
            continue
        for ret_vals in itertools.product(*ret_domains):
            mid = out.state.set_var_many(ret_names, ret_vals) if ret_names else out.state
            if _inhale1(ctx, m.post, mid) is FAILURE:
                return False, (
                    f"inhaling the postcondition of {m.name} fails from {mid}"
                )
    return True, None
