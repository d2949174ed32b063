"""Continuation-based small-step semantics for the Boogie subset.

A program point is a residual block paired with a continuation (``Stop`` or a
sequence of pending blocks).  Simple commands execute one at a time:
``assume false`` silently prunes the trace, ``assert false`` fails,
assignments and havoc always succeed, with havoc enumerating the bounded
carrier of the variable's type.  Points are normalised so that exhausted
blocks pop their continuation eagerly; the terminal point is unique.

The driver :func:`run` explores the reachable configurations breadth-first
with deduplication.  Reads of never-assigned variables either branch over the
variable's carrier (equivalent to initialising every such variable by
enumeration up front, but skipping variables whose value is never observed) or
raise, depending on the caller's mode.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Optional, Tuple, Union

from ..common import Bounds, FrozenMap, MalformedProgramError, PairBudget
from .ast import (
    BAssert, BAssign, BAssume, BHavoc, Block, BlockIf, BProc, BStmt,
)
from .interp import BCtx, UnassignedVar, eval_bexpr


@dataclass(frozen=True)
class Stop:
    pass


@dataclass(frozen=True)
class SeqCont:
    blocks: BStmt
    next: "Continuation"


Continuation = Union[Stop, SeqCont]
STOP = Stop()
EMPTY_BLOCK = Block((), None)


@dataclass(frozen=True)
class ProgramPoint:
    block: Block
    cont: Continuation


TERMINAL = ProgramPoint(EMPTY_BLOCK, STOP)


def normalize(point: ProgramPoint) -> ProgramPoint:
    while (
        not point.block.cmds
        and point.block.branch is None
        and isinstance(point.cont, SeqCont)
    ):
        point = enter(point.cont.blocks, point.cont.next)
    return point


def enter(blocks: BStmt, cont: Continuation) -> ProgramPoint:
    if not blocks:
        if isinstance(cont, SeqCont):
            return normalize(ProgramPoint(EMPTY_BLOCK, cont))
        return TERMINAL
    return normalize(ProgramPoint(blocks[0], SeqCont(tuple(blocks[1:]), cont)))


def start_point(body: BStmt) -> ProgramPoint:
    return enter(tuple(body), STOP)


Cursor = Tuple[Tuple[object, object], ...]
# A cursor addresses a point in a block list: every pair but the last is
# (block index, "T"|"E") descending into a branch; the last pair is
# (block index, command offset).


def resolve_cursor(body: BStmt, cursor: Cursor) -> ProgramPoint:
    return _resolve(tuple(body), cursor, STOP)


def _resolve(blocks: BStmt, cursor: Cursor, cont: Continuation) -> ProgramPoint:
    (bi, x), rest = cursor[0], cursor[1:]
    if bi == len(blocks) and x == 0 and not rest:
        # One past the last block: the point where this block list has been
        # fully executed and control passes to the continuation.
        if isinstance(cont, SeqCont):
            return normalize(ProgramPoint(EMPTY_BLOCK, cont))
        return TERMINAL
    if not isinstance(bi, int) or bi >= len(blocks):
        raise MalformedProgramError(f"bad cursor {cursor!r}")
    after = SeqCont(tuple(blocks[bi + 1:]), cont)
    blk = blocks[bi]
    if not rest:
        if not isinstance(x, int) or x > len(blk.cmds):
            raise MalformedProgramError(f"bad cursor offset {cursor!r}")
        return normalize(ProgramPoint(Block(blk.cmds[x:], blk.branch), after))
    if blk.branch is None or x not in ("T", "E"):
        raise MalformedProgramError(f"bad cursor branch {cursor!r}")
    branch = blk.branch.then_s if x == "T" else blk.branch.else_s
    return _resolve(tuple(branch), rest, after)


# --------------------------------------------------------------------------
# Execution
# --------------------------------------------------------------------------

@dataclass
class RunResult:
    at_target: set  # states observed exactly at the target point
    failed: bool
    failure_state: Optional[FrozenMap] = None
    terminal: Optional[set] = None  # states at the terminal point (if tracked)


def run(
    ctx: BCtx,
    start: ProgramPoint,
    state: FrozenMap,
    target: Optional[ProgramPoint] = None,
    force_unassigned: bool = False,
    stop_on_failure: bool = False,
    budget: Optional[PairBudget] = None,
    scope: Optional[BProc] = None,
) -> RunResult:
    """Explore all executions from ``(start, state)``.

    States arriving exactly at ``target`` are collected and not explored
    further.  With ``force_unassigned`` a read of an unassigned variable
    branches over its carrier; otherwise it is an error (the validation oracle
    requires every observed variable to be pinned by the relation or assigned
    beforehand)."""
    target = normalize(target) if target is not None else None
    start = normalize(start)
    result = RunResult(at_target=set(), failed=False)
    seen: set = set()
    todo: deque = deque([(start, state)])
    while todo:
        point, st = todo.popleft()
        if (point, st) in seen:
            continue
        seen.add((point, st))
        if budget is not None:
            budget.charge()
        if target is not None and point == target:
            result.at_target.add(st)
            continue
        if point == TERMINAL:
            continue
        for nxt in _step(ctx, point, st, force_unassigned, result, scope):
            todo.append(nxt)
        if result.failed and stop_on_failure:
            return result
    return result


def _step(
    ctx: BCtx,
    point: ProgramPoint,
    st: FrozenMap,
    force: bool,
    result: RunResult,
    scope: Optional[BProc] = None,
) -> Iterable[tuple[ProgramPoint, FrozenMap]]:
    blk = point.block
    if blk.cmds:
        cmd = blk.cmds[0]
        after = normalize(ProgramPoint(Block(blk.cmds[1:], blk.branch), point.cont))
        match cmd:
            case BAssume(e):
                v, states = _eval_forcing(ctx, st, e, force, scope)
                if v is None:
                    return [(point, s) for s in states]
                return [(after, st)] if v is True else []
            case BAssert(e):
                v, states = _eval_forcing(ctx, st, e, force, scope)
                if v is None:
                    return [(point, s) for s in states]
                if v is True:
                    return [(after, st)]
                result.failed = True
                result.failure_state = st
                return []
            case BAssign(x, e):
                v, states = _eval_forcing(ctx, st, e, force, scope)
                if v is None:
                    return [(point, s) for s in states]
                return [(after, st.set(x, v))]
            case BHavoc(x):
                fast = _havoc_idop_fast(ctx, blk, point, st, x)
                if fast is not None:
                    return fast
                t = _var_btype(ctx, x, scope)
                return [(after, st.set(x, val)) for val in ctx.carrier(t)]
        raise MalformedProgramError(f"bad command {cmd!r}")
    if blk.branch is not None:
        br = blk.branch
        then_p = enter(tuple(br.then_s), point.cont)
        else_p = enter(tuple(br.else_s), point.cont)
        if br.cond is None:
            return [(then_p, st), (else_p, st)]
        v, states = _eval_forcing(ctx, st, br.cond, force, scope)
        if v is None:
            return [(point, s) for s in states]
        return [(then_p if v is True else else_p, st)]
    return []


def _havoc_idop_fast(ctx: BCtx, blk: Block, point: ProgramPoint, st, x: str):
    """Exact shortcut for ``havoc x; assume idOnPositive(h, x, m)`` with
    ``h``/``m`` plain variables: enumerate only the heaps that agree with
    ``h`` on positive-``m`` locations instead of generating every heap and
    filtering.  Behaviourally identical to the generic path."""
    import itertools

    from ..viper.ast import Ref
    from .ast import BAssume, BCall, BVar
    from .values import MapVal

    if len(blk.cmds) < 2:
        return None
    nxt = blk.cmds[1]
    if not (isinstance(nxt, BAssume) and isinstance(nxt.expr, BCall)):
        return None
    call = nxt.expr
    if call.func != "idOnPositive" or call.args[1] != BVar(x):
        return None
    harg, marg = call.args[0], call.args[2]
    if not (isinstance(harg, BVar) and isinstance(marg, BVar)):
        return None
    if harg.name == x or marg.name == x:
        return None
    try:
        base = eval_bexpr(ctx, st, harg)
        mval = eval_bexpr(ctx, st, marg)
    except UnassignedVar:
        return None
    if not (isinstance(base, MapVal) and base.kind == "heap"
            and isinstance(mval, MapVal) and mval.kind == "mask"):
        return None
    after2 = normalize(ProgramPoint(Block(blk.cmds[2:], blk.branch), point.cont))
    free = [
        (Ref(r), tok)
        for r in ctx.bounds.ref_names()
        for tok in ctx.field_tokens
        if not mval.read(Ref(r), tok) > 0
    ]
    out = []
    for values in itertools.product(*(ctx.carrier(tok.vtype) for _, tok in free)):
        h = base
        for (ref, tok), v in zip(free, values):
            h = h.upd(ref, tok, v)
        out.append((after2, st.set(x, h)))
    return out


def _eval_forcing(ctx: BCtx, st: FrozenMap, e, force: bool, scope: Optional[BProc] = None):
    """Evaluate ``e``; on a read of an unassigned variable either return the
    branched states (force mode) or raise."""
    try:
        return eval_bexpr(ctx, st, e), None
    except UnassignedVar as exc:
        if not force:
            raise
        t = _var_btype(ctx, exc.name, scope)
        return None, [st.set(exc.name, v) for v in ctx.carrier(t)]


def _var_btype(ctx: BCtx, name: str, scope: Optional[BProc] = None):
    for n, t in ctx.program.globals_:
        if n == name:
            return t
    procs = (scope,) if scope is not None else ctx.program.procs
    for proc in procs:
        t = proc.var_type(name)
        if t is not None:
            return t
    raise MalformedProgramError(f"unknown variable {name}")


def run_to(
    ctx: BCtx,
    start: ProgramPoint,
    state: FrozenMap,
    target: ProgramPoint,
    budget: Optional[PairBudget] = None,
    scope: Optional[BProc] = None,
) -> RunResult:
    """Oracle-mode run: collect states at ``target`` and whether any failing
    execution exists; unassigned reads are errors."""
    return run(ctx, start, state, target=target, budget=budget, scope=scope)


def proc_correct(
    ctx: BCtx,
    proc: BProc,
    budget: Optional[PairBudget] = None,
) -> tuple[bool, Optional[FrozenMap]]:
    """True when no execution of ``proc`` fails from any initial assignment of
    parameters, globals and locals over the bounded carriers.  Initial values
    are materialised lazily on first read, which is observationally equivalent
    to a leading havoc of every variable."""
    res = run(
        ctx,
        start_point(proc.body),
        FrozenMap(),
        force_unassigned=True,
        stop_on_failure=True,
        budget=budget,
        scope=proc,
    )
    if res.failed:
        return False, res.failure_state
    return True, None
