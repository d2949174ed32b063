"""Certificate checking and the overall validation verdict.

The checker is independent of the builder: it re-parses both programs,
verifies their digests, reconstructs every goal from the certificate's rule
tree top-down, discharges rule obligations by bounded enumeration, and checks
every leaf with the semantic oracle.  A second, certificate-free differential
check compares procedure correctness under the canonical interpretation with
source-level method correctness; a correct procedure whose source method is
incorrect (or whose specification is ill-formed) is reported as a soundness
flag regardless of what any certificate says.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from ..common import (
    Bounds, FormatError, PairBudget, ResourceLimitError, Vpr2BplError,
)
from ..viper import ast as V
from ..viper.semantics import (
    _inhale1, exec_stmt, method_correct, method_root_stmt, spec_well_formed,
)
from ..viper.state import FAILURE, Normal, ViperState
from ..viper.typecheck import load_program
from ..viper.printer import print_program
from ..boogie.printer import print_bprogram
from ..boogie.ast import BAssign, BProc, BProgram, BVar
from ..boogie.interp import BCtx, canonical_interpretation
from ..boogie.parser import parse_bprogram
from ..boogie.semantics import proc_correct
from ..translate.background import MASK_VAR
from ..sim import (
    SR, CompDecomp, ConsAdd, QProp, RuleApp, RuleError, SimulationGoal,
    SpecDep, apply_rule, check_q_propagation, enumerate_tau, q_holds,
)
from .certificate import Certificate, MethodCertificate, text_digest
from .oracle import MethodContext, oracle_check


@dataclass
class MethodVerdict:
    method: str
    accepted: bool
    reason: str = ""
    path: Tuple[int, ...] = ()  # child indices from the root rule
    counterexample: object = None
    requires: Tuple[str, ...] = ()  # callees whose certificates must hold


@dataclass
class Verdict:
    accepted: bool
    reason: str = ""
    methods: Tuple[MethodVerdict, ...] = ()
    flags: Tuple[str, ...] = ()  # soundness discrepancies from the differential


# --------------------------------------------------------------------------
# Per-method certificate checking
# --------------------------------------------------------------------------

def _terminal_cursor(proc: BProc):
    body = proc.body
    if not body or body[-1].branch is not None:
        raise FormatError("procedure body must end in a plain block")
    return ((len(body) - 1, len(body[-1].cmds)),)


def _structural_ok(m: V.Method, proc: BProc, mc: MethodCertificate) -> Optional[str]:
    expected = tuple(mc.record.var[n] for n, _ in m.params + m.returns)
    if tuple(n for n, _ in proc.params) != expected:
        return "procedure parameters do not match the method signature"
    body = proc.body
    if not (body and body[0].cmds
            and body[0].cmds[0] == BAssign(MASK_VAR, BVar("ZeroMask"))):
        return "procedure must start by clearing the mask"
    return None


def check_method_certificate(
    program: V.Program,
    bprogram: BProgram,
    mc_cert: MethodCertificate,
    bounds: Bounds,
    budget: Optional[PairBudget] = None,
    bctx: Optional[BCtx] = None,
) -> MethodVerdict:
    name = mc_cert.method
    try:
        m = program.method(name)
    except Vpr2BplError as exc:
        return MethodVerdict(name, False, str(exc))
    proc = next((p for p in bprogram.procs if p.name == mc_cert.proc), None)
    if proc is None:
        return MethodVerdict(name, False, f"no procedure {mc_cert.proc}")
    bad = _structural_ok(m, proc, mc_cert)
    if bad is not None:
        return MethodVerdict(name, False, bad)
    try:
        end = _terminal_cursor(proc)
        mc = MethodContext(program, bprogram, m, proc, mc_cert.record,
                           bounds, budget, bctx)
    except Vpr2BplError as exc:
        return MethodVerdict(name, False, str(exc))
    rel = SR(mc_cert.record)
    root = SimulationGoal(
        "stm", method_root_stmt(m), rel, rel, ((0, 1),), end
    )
    requires: List[str] = []
    verdict = _walk(root, mc_cert.tree, mc, (), requires)
    if verdict is not None:
        verdict.requires = tuple(dict.fromkeys(requires))
        return verdict
    return MethodVerdict(name, True, requires=tuple(dict.fromkeys(requires)))


def _walk(
    goal: SimulationGoal,
    app: RuleApp,
    mc: MethodContext,
    path: Tuple[int, ...],
    requires: List[str],
) -> Optional[MethodVerdict]:
    name = mc.method.name
    if app.rule == "Atomic":
        if app.children:
            return MethodVerdict(name, False, "leaf rule with children", path)
        try:
            cx = oracle_check(goal, mc)
        except ResourceLimitError:
            raise
        except Vpr2BplError as exc:
            return MethodVerdict(
                name, False, f"bad goal addressing: {exc}", path
            )
        if cx is not None:
            return MethodVerdict(
                name, False, f"goal violated: {cx.reason}", path, cx
            )
        return None
    try:
        children, obligations = apply_rule(goal, app, mc.rule_env)
    except Vpr2BplError as exc:
        return MethodVerdict(name, False, f"bad rule application: {exc}", path)
    if len(children) != len(app.children):
        return MethodVerdict(
            name, False,
            f"rule {app.rule} expects {len(children)} children,"
            f" certificate has {len(app.children)}",
            path,
        )
    for ob in obligations:
        bad = _discharge(ob, goal, mc, requires)
        if bad is not None:
            return MethodVerdict(
                name, False, f"obligation failed: {bad[0]}", path, bad[1]
            )
    for i, (g, a) in enumerate(zip(children, app.children)):
        v = _walk(g, a, mc, path + (i,), requires)
        if v is not None:
            return v
    return None


def _discharge(ob, goal: SimulationGoal, mc: MethodContext, requires: List[str]):
    """Check one obligation; returns ``(description, counterexample)`` on
    failure."""
    match ob:
        case QProp(kind, connective, assertion):
            cx = check_q_propagation(
                kind, connective, assertion, mc.space, mc.qcache, mc.budget
            )
            if cx is not None:
                return (f"{kind} does not propagate across {connective}", cx)
        case SpecDep(callee, which, assertion):
            if not any(m.name == callee for m in mc.program.methods):
                return (f"call to unknown method {callee}", None)
            requires.append(callee)
            zm = mc.space.zero_mask()
            for store in mc.space.stores:
                for heap in mc.space.heaps:
                    if mc.budget is not None:
                        mc.budget.charge()
                    st = ViperState(store, heap, zm)
                    if _inhale1(mc.vctx, assertion, st) is FAILURE:
                        return (
                            f"substituted {which}condition of {callee}"
                            " is not well-formed",
                            st,
                        )
        case CompDecomp(first, second):
            for tau in enumerate_tau(goal.r_in, mc.space, mc.budget):
                _, red = tau
                whole = exec_stmt(
                    mc.vctx, V.Seq(first, second), red, mc.bounds, mc.budget
                )
                composed = set()
                for out in exec_stmt(mc.vctx, first, red, mc.bounds, mc.budget):
                    if isinstance(out, Normal):
                        composed |= exec_stmt(
                            mc.vctx, second, out.state, mc.bounds, mc.budget
                        )
                    else:
                        composed.add(out)
                if whole != frozenset(composed):
                    return ("sequencing does not decompose", red)
        case ConsAdd(q):
            for tau in enumerate_tau(goal.r_in, mc.space, mc.budget):
                if not q_holds(q, mc.qcache, mc.bounds, tau):
                    return (f"input relation does not establish {q.kind}", tau)
        case _:
            return (f"unknown obligation {ob!r}", None)
    return None


# --------------------------------------------------------------------------
# Certificate-free differential check
# --------------------------------------------------------------------------

def check_rel_method_proc(
    program: V.Program,
    m: V.Method,
    bprogram: BProgram,
    proc: BProc,
    bounds: Bounds,
    budget: Optional[PairBudget] = None,
    bctx: Optional[BCtx] = None,
) -> Tuple[bool, Optional[str]]:
    """Soundness differential: a procedure correct under the canonical
    interpretation must come from a correct method with a well-formed
    specification.  Returns ``(ok, discrepancy)``."""
    if bctx is None:
        bctx = canonical_interpretation(bprogram, bounds)
    ok, _wit = proc_correct(bctx, proc, budget)
    if not ok:
        return True, None
    wf, why = spec_well_formed(program, m, bounds, budget)
    if not wf:
        return False, (
            f"procedure {proc.name} verifies but the specification of"
            f" {m.name} is ill-formed: {why}"
        )
    correct, wit = method_correct(program, m, bounds, budget)
    if not correct:
        return False, (
            f"procedure {proc.name} verifies but method {m.name} fails"
            f" from {wit}"
        )
    return True, None


# --------------------------------------------------------------------------
# Overall verdict
# --------------------------------------------------------------------------

def _load_pair(source_text: str, target_text: str):
    return load_program(source_text), parse_bprogram(target_text)


def check_certificate(
    cert: Certificate,
    source_text: str,
    target_text: str,
    budget: Optional[PairBudget] = None,
) -> Verdict:
    """Check every method certificate against the two program texts.

    Digests are taken over the canonical re-print of each parsed program, so
    a certificate stays valid across whitespace or comment changes but not
    across any change in program content."""
    program, bprogram = _load_pair(source_text, target_text)
    if cert.source_digest != text_digest(print_program(program)):
        return Verdict(False, "source program does not match the certificate")
    if cert.target_digest != text_digest(print_bprogram(bprogram)):
        return Verdict(False, "translated program does not match the certificate")
    bctx = canonical_interpretation(bprogram, cert.bounds)
    results = tuple(
        check_method_certificate(
            program, bprogram, mc, cert.bounds, budget, bctx
        )
        for mc in cert.methods
    )
    return combine_method_verdicts(results)


def combine_method_verdicts(results: Tuple[MethodVerdict, ...]) -> Verdict:
    """Overall verdict from per-method results, closing specification
    dependencies: a certificate may lean on a callee's specification only
    when that callee's own certificate is accepted."""
    accepted = all(r.accepted for r in results)
    by_name = {r.method: r for r in results}
    for r in results:
        for callee in r.requires:
            dep = by_name.get(callee)
            if dep is None or not dep.accepted:
                accepted = False
                if r.accepted:
                    r.accepted = False
                    r.reason = (
                        f"depends on the certificate of {callee}, which is"
                        " missing or rejected"
                    )
    reason = "" if accepted else "; ".join(
        f"{r.method}: {r.reason}" for r in results if not r.accepted
    )
    return Verdict(accepted, reason, results)


def final_verdict(
    cert: Certificate,
    source_text: str,
    target_text: str,
    budget: Optional[PairBudget] = None,
) -> Verdict:
    """Certificate check plus the certificate-free soundness differential."""
    v = check_certificate(cert, source_text, target_text, budget)
    return add_differential_flags(cert, source_text, target_text, v, budget)


def add_differential_flags(
    cert: Certificate,
    source_text: str,
    target_text: str,
    v: Verdict,
    budget: Optional[PairBudget] = None,
) -> Verdict:
    """Extend a certificate-check verdict with the differential soundness
    flags for every certified method."""
    if v.reason.endswith("match the certificate"):
        return v
    program, bprogram = _load_pair(source_text, target_text)
    bctx = canonical_interpretation(bprogram, cert.bounds)
    flags = []
    for mc in cert.methods:
        try:
            m = program.method(mc.method)
            proc = next(p for p in bprogram.procs if p.name == mc.proc)
        except (Vpr2BplError, StopIteration):
            continue  # already rejected by the certificate check
        ok, why = check_rel_method_proc(
            program, m, bprogram, proc, cert.bounds, budget, bctx
        )
        if not ok:
            flags.append(why)
    accepted = v.accepted and not flags
    reason = v.reason
    if flags:
        reason = "; ".join(filter(None, [reason] + flags))
    return Verdict(accepted, reason, v.methods, tuple(flags))
