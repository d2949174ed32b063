"""Decomposition rules over simulation goals.

A certificate is a tree of rule applications.  :func:`apply_rule` re-derives
the child goals of a rule from the parent goal and the rule's parameters
(cursors of intermediate program points plus the occasional fresh-variable
name), together with the side-condition obligations the rule incurs.  The
checker never trusts recorded child goals: it reconstructs them here and
discharges every leaf with the bounded-exhaustive oracle, so the parameters
only steer *where* the proof is cut, never *what* is proved.

Statement rules cut a statement's span into well-definedness checks, a
permission-checked effect, and Boogie-only epilogues; assertion rules follow
the connective structure of inhaled/exhaled assertions.  The generic
composition and consequence rules carry semantic obligations checked by
enumeration; the specialised rules are their pre-proved instances and carry
none (their shapes are exercised by the randomized rule-soundness suite).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

from ..common import Vpr2BplError
from ..viper import ast as V
from ..viper.eval import VCtx
from ..viper.semantics import call_spec_substitution
from ..boogie.ast import BProc
from ..boogie.semantics import resolve_cursor
from ..translate.hints import Cursor
from .goals import SimulationGoal
from .qpred import Q_EXH, Q_INH, QRef
from .relation import SR, FstProj, SndProj

RULE_NAMES = (
    "Comp", "BProp", "SeqSim", "ExhSim", "InhSim", "RSepSim", "RImpSim",
    "RCondSim", "Cons", "IfSim", "FieldAssignSim", "LocalAssignSim",
    "VarDeclSim", "MethodCallSim", "AssertSim", "Atomic",
)


class RuleError(Vpr2BplError):
    """A rule application does not fit its goal (malformed certificate)."""


@dataclass(frozen=True)
class RuleApp:
    rule: str
    params: Tuple[Tuple[str, object], ...] = ()
    children: Tuple["RuleApp", ...] = ()

    def param(self, key: str, default=None):
        for k, v in self.params:
            if k == key:
                return v
        return default


# Side-condition obligations -------------------------------------------------

@dataclass(frozen=True)
class QProp:
    """Predicate propagation across a connective split."""

    kind: str
    connective: str
    assertion: V.VAssert


@dataclass(frozen=True)
class SpecDep:
    """A call-site encoding leans on the callee's specification: the
    substituted assertion must inhale without failing from permission-free
    states (the callee's own wellformedness check, instantiated here)."""

    callee: str
    which: str  # "pre" | "post"
    assertion: V.VAssert


@dataclass(frozen=True)
class CompDecomp:
    """Success-decomposition and failure-disjunction of sequencing."""

    first: V.VStmt
    second: V.VStmt


@dataclass(frozen=True)
class ConsAdd:
    """Input strengthening: every related input satisfies the predicate."""

    q: QRef


@dataclass(frozen=True)
class RuleEnv:
    program: V.Program
    method: V.Method
    vctx: VCtx
    proc: BProc


# ---------------------------------------------------------------------------

def _cursor(params: RuleApp, key: str) -> Cursor:
    v = params.param(key)
    if v is None:
        raise RuleError(f"rule {params.rule} is missing cursor {key!r}")
    return tuple((a, b) for a, b in v)


def _name(params: RuleApp, key: str) -> str:
    v = params.param(key)
    if not isinstance(v, str):
        raise RuleError(f"rule {params.rule} is missing name {key!r}")
    return v


def _plain_sr(goal: SimulationGoal) -> SR:
    if not isinstance(goal.r_in, SR) or goal.r_in.paired:
        raise RuleError(f"rule needs an unpaired input relation, got {goal.r_in!r}")
    return goal.r_in


def _sub_q(q: Optional[QRef], a: V.VAssert) -> Optional[QRef]:
    return QRef(q.kind, a) if q is not None else None


def _check_q(goal: SimulationGoal, kind: Optional[str]) -> None:
    if kind is None:
        if goal.q is not None:
            raise RuleError("goal carries an unexpected predicate")
        return
    if goal.q is None or goal.q.kind != kind:
        raise RuleError(f"goal predicate must be {kind}")
    subject = goal.subject
    if isinstance(subject, (V.Inhale, V.Exhale)):
        subject = subject.assertion
    if goal.q.assertion != subject:
        raise RuleError("goal predicate constrains a different assertion")


def _paired_from(goal: SimulationGoal, wm: str) -> SR:
    r = _plain_sr(goal)
    if wm in r.rec.var.values() or wm in (r.rec.h, r.rec.m):
        raise RuleError(f"evaluation-mask variable {wm!r} aliases a tracked variable")
    return SR(r.rec.with_eval_mask(wm), r.aux, paired=True)


def _same_point(env: RuleEnv, c1: Cursor, c2: Cursor) -> bool:
    return resolve_cursor(env.proc.body, c1) == resolve_cursor(env.proc.body, c2)


def apply_rule(
    goal: SimulationGoal, app: RuleApp, env: RuleEnv
) -> Tuple[Tuple[SimulationGoal, ...], Tuple[object, ...]]:
    """Reconstruct the child goals and obligations of one rule application."""
    handler = _HANDLERS.get(app.rule)
    if handler is None:
        raise RuleError(f"unknown rule {app.rule!r}")
    return handler(goal, app, env)


# --------------------------------------------------------------------- rules

def _seq(goal, app, env, with_obligation):
    if goal.kind != "stm" or not isinstance(goal.subject, V.Seq):
        raise RuleError("sequencing rule needs a stm goal over a sequence")
    _check_q(goal, None)
    mid = _cursor(app, "mid")
    s1, s2 = goal.subject.first, goal.subject.second
    children = (
        SimulationGoal("stm", s1, goal.r_in, goal.r_in, goal.start, mid),
        SimulationGoal("stm", s2, goal.r_in, goal.r_out, mid, goal.end),
    )
    obligations = (CompDecomp(s1, s2),) if with_obligation else ()
    return children, obligations


def _seq_sim(goal, app, env):
    return _seq(goal, app, env, with_obligation=False)


def _comp(goal, app, env):
    return _seq(goal, app, env, with_obligation=True)


def _bprop(goal, app, env):
    g1 = _cursor(app, "g1")
    g2 = _cursor(app, "g2")
    inner = SimulationGoal(
        goal.kind, goal.subject, goal.r_in, goal.r_out, g1, g2, goal.q
    )
    children = (
        SimulationGoal("bsim", None, goal.r_in, goal.r_in, goal.start, g1),
        inner,
        SimulationGoal("bsim", None, goal.r_out, goal.r_out, g2, goal.end),
    )
    return children, ()


def _cons(goal, app, env):
    kind = app.param("q")
    subject = goal.subject
    if isinstance(subject, (V.Inhale, V.Exhale)):
        subject = subject.assertion
    if kind is None:
        child_q = None
    else:
        if not isinstance(subject, (V.Pure, V.Acc, V.Sep, V.Implies, V.CondAssert)):
            raise RuleError("consequence predicate needs an assertion subject")
        child_q = QRef(kind, subject)
    child = SimulationGoal(
        goal.kind, goal.subject, goal.r_in, goal.r_out,
        goal.start, goal.end, child_q,
    )
    obligations: Tuple[object, ...] = ()
    if child_q is not None and goal.q is None:
        obligations = (ConsAdd(child_q),)
    elif child_q is not None and goal.q != child_q:
        raise RuleError("consequence cannot exchange predicates")
    return (child,), obligations


def _inh_sim(goal, app, env):
    if goal.kind != "stm" or not isinstance(goal.subject, V.Inhale):
        raise RuleError("InhSim needs a stm goal over an inhale")
    if goal.q is not None:
        _check_q(goal, goal.q.kind)
        if goal.q.kind != Q_INH:
            raise RuleError("inhale goals use the inhale predicate")
    a = goal.subject.assertion
    r = goal.r_in
    q = goal.q

    def inh(sub_a, start, end):
        return SimulationGoal(
            "stm", V.Inhale(sub_a), r, r, start, end, _sub_q(q, sub_a)
        )

    def wf(exprs, start, end):
        return SimulationGoal("wf", tuple(exprs), r, r, start, end, q)

    def trailing(start):
        return SimulationGoal("bsim", None, r, goal.r_out, start, goal.end)

    obligations: Tuple[object, ...] = ()
    match a:
        case V.Sep(a1, a2):
            mid = _cursor(app, "mid")
            tree_end = _cursor(app, "tree_end")
            children = (
                inh(a1, goal.start, mid),
                inh(a2, mid, tree_end),
                trailing(tree_end),
            )
            if q is not None:
                obligations = (QProp(q.kind, "sep", a),)
        case V.Implies(c, body):
            wd_end = _cursor(app, "wd_end")
            then_start = _cursor(app, "then_start")
            then_end = _cursor(app, "then_end")
            children = (
                wf((c,), goal.start, wd_end),
                inh(body, then_start, then_end),
                trailing(then_end),
            )
            if q is not None:
                obligations = (QProp(q.kind, "imp", a),)
        case V.CondAssert(c, t, e):
            wd_end = _cursor(app, "wd_end")
            children = (
                wf((c,), goal.start, wd_end),
                inh(t, _cursor(app, "then_start"), _cursor(app, "then_end")),
                inh(e, _cursor(app, "else_start"), _cursor(app, "else_end")),
                trailing(_cursor(app, "then_end")),
            )
            if q is not None:
                obligations = (QProp(q.kind, "cond", a),)
        case _:
            raise RuleError("InhSim splits a connective; atoms are oracle leaves")
    return children, obligations


def _exh_sim(goal, app, env):
    if goal.kind != "stm" or not isinstance(goal.subject, V.Exhale):
        raise RuleError("ExhSim needs a stm goal over an exhale")
    _check_q(goal, None)
    a = goal.subject.assertion
    r = _plain_sr(goal)
    srp = _paired_from(goal, _name(app, "wm"))
    snap_end = _cursor(app, "snap_end")
    rc_end = _cursor(app, "rc_end")
    children = (
        SimulationGoal("bsim", None, r, srp, goal.start, snap_end),
        SimulationGoal("rc", a, srp, srp, snap_end, rc_end),
        SimulationGoal(
            "generic", ("nondet", a), srp, SndProj(r), rc_end, goal.end
        ),
    )
    return children, ()


def _assert_sim(goal, app, env):
    if goal.kind != "stm" or not isinstance(goal.subject, V.VAssertStmt):
        raise RuleError("AssertSim needs a stm goal over an assert")
    _check_q(goal, None)
    a = goal.subject.assertion
    r = _plain_sr(goal)
    srp = _paired_from(goal, _name(app, "wm"))
    snap_end = _cursor(app, "snap_end")
    rc_end = _cursor(app, "rc_end")
    children = (
        SimulationGoal("bsim", None, r, srp, goal.start, snap_end),
        SimulationGoal("rc", a, srp, srp, snap_end, rc_end),
        SimulationGoal("bsim", None, srp, FstProj(r), rc_end, goal.end),
    )
    return children, ()


def _if_sim(goal, app, env):
    if goal.kind != "stm" or not isinstance(goal.subject, V.If):
        raise RuleError("IfSim needs a stm goal over a conditional")
    _check_q(goal, None)
    s = goal.subject
    r = goal.r_in
    then_end = _cursor(app, "then_end")
    children = (
        SimulationGoal("wf", (s.cond,), r, r, goal.start, _cursor(app, "wd_end")),
        SimulationGoal("stm", s.then_s, r, r, _cursor(app, "then_start"), then_end),
        SimulationGoal("stm", s.else_s, r, r,
                       _cursor(app, "else_start"), _cursor(app, "else_end")),
        SimulationGoal("bsim", None, r, goal.r_out, then_end, goal.end),
    )
    return children, ()


def _assign_sim(goal, app, env, exprs, stmt_type):
    if goal.kind != "stm" or not isinstance(goal.subject, stmt_type):
        raise RuleError(f"rule needs a stm goal over {stmt_type.__name__}")
    _check_q(goal, None)
    r = goal.r_in
    wd_end = _cursor(app, "wd_end")
    eff_end = _cursor(app, "eff_end")
    children = (
        SimulationGoal("wf", tuple(exprs), r, r, goal.start, wd_end),
        SimulationGoal("generic", ("effect", goal.subject), r, r, wd_end, eff_end),
        SimulationGoal("bsim", None, r, goal.r_out, eff_end, goal.end),
    )
    return children, ()


def _field_assign_sim(goal, app, env):
    s = goal.subject
    if not isinstance(s, V.FieldAssign):
        raise RuleError("FieldAssignSim needs a field assignment")
    return _assign_sim(goal, app, env, (s.rcv, s.rhs), V.FieldAssign)


def _local_assign_sim(goal, app, env):
    s = goal.subject
    if not isinstance(s, V.LocalAssign):
        raise RuleError("LocalAssignSim needs a local assignment")
    return _assign_sim(goal, app, env, (s.rhs,), V.LocalAssign)


def _var_decl_sim(goal, app, env):
    if goal.kind != "stm" or not isinstance(goal.subject, V.VarDecl):
        raise RuleError("VarDeclSim needs a stm goal over a declaration")
    _check_q(goal, None)
    r = goal.r_in
    eff_end = _cursor(app, "eff_end")
    children = (
        SimulationGoal("generic", ("effect", goal.subject), r, r,
                       goal.start, eff_end),
        SimulationGoal("bsim", None, r, goal.r_out, eff_end, goal.end),
    )
    return children, ()


def _method_call_sim(goal, app, env):
    if goal.kind != "stm" or not isinstance(goal.subject, V.MethodCall):
        raise RuleError("MethodCallSim needs a stm goal over a call")
    _check_q(goal, None)
    call = goal.subject
    pre_s, post_s = call_spec_substitution(env.vctx, call)
    r = _plain_sr(goal)
    if r.rec.m0 is not None:
        raise RuleError("call goals need a record without an evaluation mask")
    srfree = SR(r.rec, r.aux, paired=True)
    rc_end = _cursor(app, "rc_end")
    sel_end = _cursor(app, "sel_end")
    havoc_end = _cursor(app, "havoc_end")
    inh_end = _cursor(app, "inh_end")
    children = (
        SimulationGoal("rc", pre_s, r, srfree, goal.start, rc_end,
                       QRef(Q_EXH, pre_s)),
        SimulationGoal("generic", ("nondet", pre_s), srfree, SndProj(r),
                       rc_end, sel_end),
        SimulationGoal("generic", ("havoc", call.targets), r, r,
                       sel_end, havoc_end),
        SimulationGoal("stm", V.Inhale(post_s), r, r, havoc_end, inh_end,
                       QRef(Q_INH, post_s)),
        SimulationGoal("bsim", None, r, goal.r_out, inh_end, goal.end),
    )
    obligations = (
        SpecDep(call.method, "pre", pre_s),
        SpecDep(call.method, "post", post_s),
    )
    return children, obligations


def _rsep_sim(goal, app, env):
    if goal.kind != "rc" or not isinstance(goal.subject, V.Sep):
        raise RuleError("RSepSim needs a rc goal over a separating conjunction")
    if goal.q is not None:
        _check_q(goal, goal.q.kind)
    a1, a2 = goal.subject.left, goal.subject.right
    r_mid = goal.r_out
    if not (isinstance(r_mid, SR) and r_mid.paired):
        raise RuleError("RSepSim needs a paired output relation")
    mid = _cursor(app, "mid")
    q = goal.q
    children = (
        SimulationGoal("rc", a1, goal.r_in, r_mid, goal.start, mid,
                       _sub_q(q, a1)),
        SimulationGoal("rc", a2, r_mid, goal.r_out, mid, goal.end,
                       _sub_q(q, a2)),
    )
    obligations = (QProp(q.kind, "sep", goal.subject),) if q else ()
    return children, obligations


def _rbranch_sim(goal, app, env, node_type, connective):
    if goal.kind != "rc" or not isinstance(goal.subject, node_type):
        raise RuleError(f"rule needs a rc goal over {node_type.__name__}")
    if goal.q is not None:
        _check_q(goal, goal.q.kind)
    q = goal.q
    wd_end = _cursor(app, "wd_end")
    wf_goal = SimulationGoal(
        "wf", (goal.subject.cond,), goal.r_in, goal.r_in,
        goal.start, wd_end, q,
    )
    if connective == "imp":
        then_end = _cursor(app, "then_end")
        if not _same_point(env, then_end, goal.end):
            raise RuleError("implication branch must rejoin at the goal's end")
        children = (
            wf_goal,
            SimulationGoal("rc", goal.subject.body, goal.r_in, goal.r_out,
                           _cursor(app, "then_start"), then_end,
                           _sub_q(q, goal.subject.body)),
        )
    else:
        then_end = _cursor(app, "then_end")
        else_end = _cursor(app, "else_end")
        if not (_same_point(env, then_end, goal.end)
                and _same_point(env, else_end, goal.end)):
            raise RuleError("conditional branches must rejoin at the goal's end")
        children = (
            wf_goal,
            SimulationGoal("rc", goal.subject.then_a, goal.r_in, goal.r_out,
                           _cursor(app, "then_start"), then_end,
                           _sub_q(q, goal.subject.then_a)),
            SimulationGoal("rc", goal.subject.else_a, goal.r_in, goal.r_out,
                           _cursor(app, "else_start"), else_end,
                           _sub_q(q, goal.subject.else_a)),
        )
    obligations = (QProp(q.kind, connective, goal.subject),) if q else ()
    return children, obligations


def _rimp_sim(goal, app, env):
    return _rbranch_sim(goal, app, env, V.Implies, "imp")


def _rcond_sim(goal, app, env):
    return _rbranch_sim(goal, app, env, V.CondAssert, "cond")


_HANDLERS = {
    "SeqSim": _seq_sim,
    "Comp": _comp,
    "BProp": _bprop,
    "Cons": _cons,
    "InhSim": _inh_sim,
    "ExhSim": _exh_sim,
    "AssertSim": _assert_sim,
    "IfSim": _if_sim,
    "FieldAssignSim": _field_assign_sim,
    "LocalAssignSim": _local_assign_sim,
    "VarDeclSim": _var_decl_sim,
    "MethodCallSim": _method_call_sim,
    "RSepSim": _rsep_sim,
    "RImpSim": _rimp_sim,
    "RCondSim": _rcond_sim,
}
