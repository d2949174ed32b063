"""Certificate construction from translation hints.

The builder walks the per-method hint tree alongside the source AST and
chooses, for every construct, which decomposition rule to apply and where the
intermediate program points lie.  All parameters come from hint spans and
bindings; the checker re-derives the goals independently, so a bug here can
only produce a certificate that fails to check, never an unsound acceptance.
"""

from __future__ import annotations

from typing import Tuple

from ..common import Bounds, MalformedProgramError
from ..viper import ast as V
from ..viper.eval import make_ctx
from ..viper.printer import print_program
from ..viper.semantics import call_spec_substitution
from ..boogie.ast import BAssume, BCall, BStmt, BVar
from ..boogie.printer import print_bprogram
from ..translate.background import MASK_VAR
from ..translate.hints import (
    Cursor, HintNode, MethodTranslation, ROLE_EVAL_MASK, TranslationResult,
)
from ..sim import RuleApp
from .certificate import Certificate, MethodCertificate, text_digest

_GOODMASK = BAssume(BCall("GoodMask", (), (BVar(MASK_VAR),)))
_ATOMIC = RuleApp("Atomic")


def _cmd_at(blocks: BStmt, cursor: Cursor):
    """The command addressed by ``cursor``, or ``None`` past the end."""
    for b, x in cursor:
        blk = blocks[b]
        if isinstance(x, int):
            return blk.cmds[x] if x < len(blk.cmds) else None
        blocks = tuple(blk.branch.then_s if x == "T" else blk.branch.else_s)
    return None


def _before_goodmask(blocks: BStmt, end: Cursor) -> Cursor:
    """Step back over a trailing ``assume GoodMask(M)`` if one is present."""
    b, o = end[-1]
    if isinstance(o, int) and o > 0:
        prev = end[:-1] + ((b, o - 1),)
        if _cmd_at(blocks, prev) == _GOODMASK:
            return prev
    return end


def _app(rule: str, params: dict, *children: RuleApp) -> RuleApp:
    return RuleApp(rule, tuple(sorted(params.items())), tuple(children))


class _MethodBuilder:
    def __init__(self, program: V.Program, mt: MethodTranslation, body: BStmt):
        self.program = program
        self.method = program.method(mt.method)
        self.vctx = make_ctx(program, self.method)
        self.body = body

    # ----------------------------------------------------------- assertions
    def inh_tree(self, a: V.VAssert, node: HintNode, end: Cursor) -> RuleApp:
        """Rule tree for an inhale goal spanning the assertion node's start
        up to ``end`` (which absorbs any trailing mask-consistency assume)."""
        match a:
            case V.Pure() | V.Acc():
                return _ATOMIC
            case V.Sep(l, r):
                c0, c1 = node.children
                return _app(
                    "InhSim",
                    {"mid": c1.span.start, "tree_end": c1.span.end},
                    self.inh_tree(l, c0, c0.span.end),
                    self.inh_tree(r, c1, c1.span.end),
                    _ATOMIC,
                )
            case V.Implies(_, b):
                wd, bn = node.children
                return _app(
                    "InhSim",
                    {"wd_end": wd.span.end, "then_start": bn.span.start,
                     "then_end": bn.span.end},
                    _ATOMIC,
                    self.inh_tree(b, bn, bn.span.end),
                    _ATOMIC,
                )
            case V.CondAssert(_, t, e):
                wd, tn, en = node.children
                return _app(
                    "InhSim",
                    {"wd_end": wd.span.end,
                     "then_start": tn.span.start, "then_end": tn.span.end,
                     "else_start": en.span.start, "else_end": en.span.end},
                    _ATOMIC,
                    self.inh_tree(t, tn, tn.span.end),
                    self.inh_tree(e, en, en.span.end),
                    _ATOMIC,
                )
        raise MalformedProgramError(f"bad assertion node: {a!r}")

    def rc_tree(self, a: V.VAssert, node: HintNode) -> RuleApp:
        match a:
            case V.Pure() | V.Acc():
                return _ATOMIC
            case V.Sep(l, r):
                c0, c1 = node.children
                return _app(
                    "RSepSim", {"mid": c1.span.start},
                    self.rc_tree(l, c0), self.rc_tree(r, c1),
                )
            case V.Implies(_, b):
                wd, bn = node.children
                return _app(
                    "RImpSim",
                    {"wd_end": wd.span.end, "then_start": bn.span.start,
                     "then_end": bn.span.end},
                    _ATOMIC, self.rc_tree(b, bn),
                )
            case V.CondAssert(_, t, e):
                wd, tn, en = node.children
                return _app(
                    "RCondSim",
                    {"wd_end": wd.span.end,
                     "then_start": tn.span.start, "then_end": tn.span.end,
                     "else_start": en.span.start, "else_end": en.span.end},
                    _ATOMIC, self.rc_tree(t, tn), self.rc_tree(e, en),
                )
        raise MalformedProgramError(f"bad assertion node: {a!r}")

    # ----------------------------------------------------------- statements
    def exh_rule(self, a: V.VAssert, node: HintNode) -> RuleApp:
        inner = node.children[0]
        wm = node.binding(ROLE_EVAL_MASK)
        if wm is None:
            raise MalformedProgramError("exhale hint lacks an evaluation mask")
        return _app(
            "ExhSim",
            {"wm": wm, "snap_end": inner.span.start, "rc_end": inner.span.end},
            _ATOMIC, self.rc_tree(a, inner), _ATOMIC,
        )

    def stmt_tree(self, s: V.VStmt, node: HintNode) -> RuleApp:
        match s:
            case V.Skip():
                return _ATOMIC
            case V.Seq(s1, s2):
                c0, c1 = node.children
                return _app(
                    "SeqSim", {"mid": c1.span.start},
                    self.stmt_tree(s1, c0), self.stmt_tree(s2, c1),
                )
            case V.LocalAssign():
                wd = node.children[0]
                eff_end = wd.span.end[:-1] + (
                    (wd.span.end[-1][0], wd.span.end[-1][1] + 1),
                )
                return _app(
                    "LocalAssignSim",
                    {"wd_end": wd.span.end, "eff_end": eff_end},
                    _ATOMIC, _ATOMIC, _ATOMIC,
                )
            case V.FieldAssign():
                wd = node.children[0]
                return _app(
                    "FieldAssignSim",
                    {"wd_end": wd.span.end,
                     "eff_end": _before_goodmask(self.body, node.span.end)},
                    _ATOMIC, _ATOMIC, _ATOMIC,
                )
            case V.VarDecl():
                return _app(
                    "VarDeclSim",
                    {"eff_end": _before_goodmask(self.body, node.span.end)},
                    _ATOMIC, _ATOMIC,
                )
            case V.Inhale(a):
                return self.inh_tree(a, node.children[0], node.span.end)
            case V.Exhale(a):
                return self.exh_rule(a, node)
            case V.VAssertStmt(a):
                inner = node.children[0]
                wm = node.binding(ROLE_EVAL_MASK)
                return _app(
                    "AssertSim",
                    {"wm": wm, "snap_end": inner.span.start,
                     "rc_end": inner.span.end},
                    _ATOMIC, self.rc_tree(a, inner), _ATOMIC,
                )
            case V.MethodCall():
                exh_node, inh_node = node.children
                pre_s, post_s = call_spec_substitution(self.vctx, s)
                pre_inner = exh_node.children[0]
                return _app(
                    "MethodCallSim",
                    {"rc_end": pre_inner.span.end,
                     "sel_end": exh_node.span.end,
                     "havoc_end": inh_node.span.start,
                     "inh_end": inh_node.span.end},
                    self.rc_tree(pre_s, pre_inner),
                    _ATOMIC,
                    _ATOMIC,
                    self.inh_tree(
                        post_s, inh_node.children[0], inh_node.span.end
                    ),
                    _ATOMIC,
                )
            case V.If(_, t, e):
                wd, tn, en = node.children
                return _app(
                    "IfSim",
                    {"wd_end": wd.span.end,
                     "then_start": tn.span.start, "then_end": tn.span.end,
                     "else_start": en.span.start, "else_end": en.span.end},
                    _ATOMIC, self.stmt_tree(t, tn), self.stmt_tree(e, en),
                    _ATOMIC,
                )
        raise MalformedProgramError(f"bad statement node: {s!r}")

    # ----------------------------------------------------------------- root
    def root_tree(self, hints: HintNode) -> RuleApp:
        kids = hints.children
        inh_node = kids[0]
        body_node, exh_node = kids[-2], kids[-1]
        pre_tree = _app(
            "BProp",
            {"g1": inh_node.span.start, "g2": inh_node.span.end},
            _ATOMIC,
            self.inh_tree(
                self.method.pre, inh_node.children[0], inh_node.span.end
            ),
            _ATOMIC,
        )
        rest = _app(
            "SeqSim", {"mid": exh_node.span.start},
            self.stmt_tree(self.method.body, body_node),
            self.exh_rule(self.method.post, exh_node),
        )
        return _app("SeqSim", {"mid": body_node.span.start}, pre_tree, rest)


def build_method_certificate(
    program: V.Program, mt: MethodTranslation, proc_body: BStmt
) -> MethodCertificate:
    builder = _MethodBuilder(program, mt, proc_body)
    return MethodCertificate(
        mt.method, mt.proc, mt.record, builder.root_tree(mt.hints)
    )


def build_certificate(
    program: V.Program, result: TranslationResult, bounds: Bounds
) -> Certificate:
    procs = {p.name: p for p in result.program.procs}
    methods = tuple(
        build_method_certificate(program, mt, procs[mt.proc].body)
        for mt in result.methods
    )
    return Certificate(
        text_digest(print_program(program)),
        text_digest(print_bprogram(result.program)),
        bounds,
        methods,
    )
