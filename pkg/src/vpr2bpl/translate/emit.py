"""Statement and assertion encoding into the Boogie subset.

The shape of the emitted code follows the classic mask/heap encoding: inhale
adds permission after a non-negativity check and a null guard, field
assignment checks write permission, and exhale snapshots the mask, checks and
removes permissions, then havocs the heap constrained by ``idOnPositive``.
Every statement translation ends with ``assume GoodMask(M)`` (consecutive
duplicates collapsed).  Well-definedness asserts are emitted in evaluation
order, with non-strict connectives guarded by conditionals.

The emitter can inject named single-command weakenings (``MUTATION_KINDS``)
for robustness testing of the validation pipeline.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import FrozenSet, List, Optional, Tuple

from ..common import FrozenMap, MalformedProgramError
from ..viper import ast as V
from ..viper.eval import VCtx, make_ctx
from ..boogie.ast import (
    BAssert, BAssign, BAssume, BBin, BCall, BExpr, BHavoc, BLit, BProc,
    BProgram, BStmt, BType, BUn, BVar, Block, BlockIf, HTYPE, MTYPE, REAL,
)
from .background import HEAP_VAR, MASK_VAR, background_decls, btype_of, field_const
from .hints import (
    BindingHint, Cursor, CursorHint, HintNode, MethodTranslation,
    ROLE_EVAL_MASK, ROLE_HAVOC_TARGET, ROLE_SCOPED_VAR, ROLE_TEMP_PERM,
    SELECT_EMITTED, SELECT_OMITTED, TranslationRecord, TranslationResult,
    VariantHint, WD_CHECKED, WD_OMITTED,
)

MUTATION_KINDS = frozenset({
    "exhale-drop-nonneg-assert",
    "exhale-drop-suff-assert",
    "exhale-weaken-suff-assert",
    "exhale-drop-decrement",
    "exhale-idop-unconstrained",
    "exhale-drop-wd-assert",
    "inhale-drop-nonneg-assert",
    "inhale-drop-null-guard",
    "fieldassign-drop-write-assert",
    "fieldassign-weaken-write-assert",
    "fieldassign-drop-wd-assert",
    "method-pre-wd-omitted",
    "method-post-wf-omitted",
})

_RESERVED = {HEAP_VAR, MASK_VAR, "null", "ZeroMask", "true", "false"}
_RESERVED_PAT = re.compile(r"^(tmp|WM|Hp)[0-9]+$|^f_|^b_")

_H = BVar(HEAP_VAR)
_M = BVar(MASK_VAR)
_RZERO = BLit(Fraction(0))
_RONE = BLit(Fraction(1))
_GOODMASK = BAssume(BCall("GoodMask", (), (_M,)))


class Accum:
    """Builds a block list while tracking cursors addressing emitted spans."""

    def __init__(self, prefix: Cursor = ()):
        self.prefix = prefix
        self.blocks: List[Block] = []
        self.cmds: list = []

    def emit(self, cmd) -> None:
        self.cmds.append(cmd)

    def here(self) -> Cursor:
        return self.prefix + ((len(self.blocks), len(self.cmds)),)

    def close_if(self, cond: Optional[BExpr], fill_then, fill_else=None) -> None:
        bi = len(self.blocks)
        ta = Accum(self.prefix + ((bi, "T"),))
        fill_then(ta)
        ea = Accum(self.prefix + ((bi, "E"),))
        if fill_else is not None:
            fill_else(ea)
        self.blocks.append(
            Block(tuple(self.cmds), BlockIf(cond, ta.done(), ea.done()))
        )
        self.cmds = []

    def done(self) -> BStmt:
        blocks = list(self.blocks)
        if self.cmds:
            blocks.append(Block(tuple(self.cmds), None))
        return tuple(blocks)


def _read_mask(mask_var: str, rcv: BExpr, fld: str, ftype: BType) -> BExpr:
    return BCall("readMask", (ftype,), (BVar(mask_var), rcv, BVar(fld)))


def _needs_wd(e: V.VExpr) -> bool:
    """Whether well-definedness checking of ``e`` can emit any command."""
    match e:
        case V.FieldAcc():
            return True
        case V.BinOp(l, op, r):
            return op in ("/", "%") or _needs_wd(l) or _needs_wd(r)
        case V.UnOp(_, x):
            return _needs_wd(x)
    return False


class MethodEmitter:
    def __init__(
        self,
        program: V.Program,
        method: V.Method,
        mutations: FrozenSet[str] = frozenset(),
    ):
        bad = mutations - MUTATION_KINDS
        if bad:
            raise MalformedProgramError(f"unknown mutations: {sorted(bad)}")
        self.program = program
        self.method = method
        self.mut = mutations
        self.ctx: VCtx = make_ctx(program, method)
        self._counters = {"tmp": 0, "WM": 0, "Hp": 0}
        self.aux_locals: List[Tuple[str, BType]] = []
        self.rec = self._make_record()

    # ------------------------------------------------------------- naming
    def _make_record(self) -> TranslationRecord:
        mapping: dict[str, str] = {}
        taken = set(_RESERVED)
        for name, _t in self.ctx.var_types:
            cand = name
            while cand in taken or _RESERVED_PAT.match(cand):
                cand = "v_" + cand
            mapping[name] = cand
            taken.add(cand)
        fields = {f.name: field_const(f.name) for f in self.program.fields}
        return TranslationRecord(FrozenMap(mapping), FrozenMap(fields))

    def fresh(self, role: str, btype: BType) -> str:
        self._counters[role] += 1
        name = f"{role}{self._counters[role]}"
        self.aux_locals.append((name, btype))
        return name

    # -------------------------------------------------------- expressions
    def tr(self, e: V.VExpr) -> BExpr:
        match e:
            case V.Var(name):
                return BVar(self.rec.var[name])
            case V.Lit(v):
                if isinstance(v, V.Ref):
                    if v != V.NULL:
                        raise MalformedProgramError(
                            f"non-null reference literal {v!r}"
                        )
                    return BVar("null")
                return BLit(v)
            case V.FieldAcc(rcv, f):
                ft = btype_of(self.ctx.field_type(f))
                return BCall(
                    "readHeap", (ft,),
                    (_H, self.tr(rcv), BVar(field_const(f))),
                )
            case V.BinOp(l, op, r):
                return BBin(self.tr(l), op, self.tr(r))
            case V.UnOp(op, x):
                return BUn(op, self.tr(x))
        raise MalformedProgramError(f"bad expression node: {e!r}")

    def _field_mask_read(self, mask_var: str, rcv: V.VExpr, f: str) -> BExpr:
        ft = btype_of(self.ctx.field_type(f))
        return _read_mask(mask_var, self.tr(rcv), field_const(f), ft)

    def _is_perm(self, e: V.VExpr) -> bool:
        match e:
            case V.Var(name):
                return self.ctx.var_type(name) is V.VType.PERM
            case V.Lit(v):
                return isinstance(v, Fraction)
            case V.FieldAcc(_, f):
                return self.ctx.field_type(f) is V.VType.PERM
            case V.BinOp(l, op, r) if op in V.ARITH_OPS:
                return self._is_perm(l) or self._is_perm(r)
            case V.UnOp("-", x):
                return self._is_perm(x)
        return False

    # ----------------------------------------------------- well-definedness
    def wd(self, acc: Accum, e: V.VExpr, mask_var: str, drop_perm: bool = False) -> None:
        """Emit asserts making every sub-evaluation of ``e`` well-defined:
        positive permission (against the evaluation mask) for field reads and
        nonzero divisors, in evaluation order, guarding the short-circuited
        operand of non-strict connectives."""
        match e:
            case V.Var() | V.Lit():
                return
            case V.FieldAcc(rcv, f):
                self.wd(acc, rcv, mask_var, drop_perm)
                if not drop_perm:
                    acc.emit(BAssert(
                        BBin(self._field_mask_read(mask_var, rcv, f), ">", _RZERO)
                    ))
            case V.BinOp(l, op, r):
                self.wd(acc, l, mask_var, drop_perm)
                if op in ("&&", "==>", "||"):
                    if not _needs_wd(r):
                        return
                    guard = self.tr(l) if op in ("&&", "==>") else BUn("!", self.tr(l))
                    acc.close_if(
                        guard,
                        lambda ta: self.wd(ta, r, mask_var, drop_perm),
                    )
                    return
                self.wd(acc, r, mask_var, drop_perm)
                if op in ("/", "%"):
                    zero = _RZERO if self._is_perm(r) else BLit(0)
                    acc.emit(BAssert(BBin(self.tr(r), "!=", zero)))
            case V.UnOp(_, x):
                self.wd(acc, x, mask_var, drop_perm)
            case _:
                raise MalformedProgramError(f"bad expression node: {e!r}")

    # ------------------------------------------------------------- helpers
    def _goodmask(self, acc: Accum) -> None:
        if acc.cmds and acc.cmds[-1] == _GOODMASK:
            return
        acc.emit(_GOODMASK)

    # --------------------------------------------------------------- inhale
    def inh_assert(self, acc: Accum, a: V.VAssert, checked: bool) -> HintNode:
        start = acc.here()
        bindings: tuple = ()
        children: list[HintNode] = []
        match a:
            case V.Pure(e):
                label = "pure"
                if checked:
                    self.wd(acc, e, MASK_VAR)
                acc.emit(BAssume(self.tr(e)))
            case V.Acc(rcv, f, p):
                label = "acc"
                if checked:
                    self.wd(acc, rcv, MASK_VAR)
                    self.wd(acc, p, MASK_VAR)
                tmp = self.fresh("tmp", REAL)
                bindings = (BindingHint(ROLE_TEMP_PERM, tmp),)
                acc.emit(BAssign(tmp, self.tr(p)))
                if "inhale-drop-nonneg-assert" not in self.mut:
                    acc.emit(BAssert(BBin(BVar(tmp), ">=", _RZERO)))
                if "inhale-drop-null-guard" not in self.mut:
                    acc.emit(BAssume(BBin(
                        BBin(BVar(tmp), ">", _RZERO),
                        "==>",
                        BBin(self.tr(rcv), "!=", BVar("null")),
                    )))
                ft = btype_of(self.ctx.field_type(f))
                acc.emit(BAssign(MASK_VAR, BCall(
                    "updMask", (ft,),
                    (_M, self.tr(rcv), BVar(field_const(f)),
                     BBin(self._field_mask_read(MASK_VAR, rcv, f), "+", BVar(tmp))),
                )))
                self._goodmask(acc)
            case V.Sep(l, r):
                label = "sep"
                children.append(self.inh_assert(acc, l, checked))
                children.append(self.inh_assert(acc, r, checked))
            case V.Implies(c, b):
                label = "imp"
                wd_start = acc.here()
                if checked:
                    self.wd(acc, c, MASK_VAR)
                children.append(HintNode("wd", CursorHint(wd_start, acc.here())))
                acc.close_if(
                    self.tr(c),
                    lambda ta: children.append(self.inh_assert(ta, b, checked)),
                )
            case V.CondAssert(c, t, e):
                label = "cond"
                wd_start = acc.here()
                if checked:
                    self.wd(acc, c, MASK_VAR)
                children.append(HintNode("wd", CursorHint(wd_start, acc.here())))
                acc.close_if(
                    self.tr(c),
                    lambda ta: children.append(self.inh_assert(ta, t, checked)),
                    lambda ea: children.append(self.inh_assert(ea, e, checked)),
                )
            case _:
                raise MalformedProgramError(f"bad assertion node: {a!r}")
        return HintNode(label, CursorHint(start, acc.here()),
                        bindings=bindings, children=tuple(children))

    def inhale(self, acc: Accum, a: V.VAssert, checked: bool) -> HintNode:
        start = acc.here()
        child = self.inh_assert(acc, a, checked)
        self._goodmask(acc)
        return HintNode(
            "inhale", CursorHint(start, acc.here()),
            variants=(VariantHint(WD_CHECKED if checked else WD_OMITTED),),
            children=(child,),
        )

    # --------------------------------------------------------------- exhale
    def exh_aux(self, acc: Accum, a: V.VAssert, eval_mask: Optional[str]) -> HintNode:
        checked = eval_mask is not None
        drop_wd = "exhale-drop-wd-assert" in self.mut
        start = acc.here()
        bindings: tuple = ()
        children: list[HintNode] = []
        match a:
            case V.Pure(e):
                label = "pure"
                if checked:
                    self.wd(acc, e, eval_mask, drop_wd)
                acc.emit(BAssert(self.tr(e)))
            case V.Acc(rcv, f, p):
                label = "acc"
                if checked:
                    self.wd(acc, rcv, eval_mask, drop_wd)
                    self.wd(acc, p, eval_mask, drop_wd)
                tmp = self.fresh("tmp", REAL)
                bindings = (BindingHint(ROLE_TEMP_PERM, tmp),)
                acc.emit(BAssign(tmp, self.tr(p)))
                if "exhale-drop-nonneg-assert" not in self.mut:
                    acc.emit(BAssert(BBin(BVar(tmp), ">=", _RZERO)))
                if "exhale-drop-suff-assert" not in self.mut:
                    op = ">" if "exhale-weaken-suff-assert" in self.mut else ">="
                    acc.close_if(
                        BBin(BVar(tmp), "!=", _RZERO),
                        lambda ta: ta.emit(BAssert(BBin(
                            self._field_mask_read(MASK_VAR, rcv, f), op, BVar(tmp)
                        ))),
                    )
                if "exhale-drop-decrement" not in self.mut:
                    ft = btype_of(self.ctx.field_type(f))
                    acc.emit(BAssign(MASK_VAR, BCall(
                        "updMask", (ft,),
                        (_M, self.tr(rcv), BVar(field_const(f)),
                         BBin(self._field_mask_read(MASK_VAR, rcv, f), "-",
                              BVar(tmp))),
                    )))
            case V.Sep(l, r):
                label = "sep"
                children.append(self.exh_aux(acc, l, eval_mask))
                children.append(self.exh_aux(acc, r, eval_mask))
            case V.Implies(c, b):
                label = "imp"
                wd_start = acc.here()
                if checked:
                    self.wd(acc, c, eval_mask, drop_wd)
                children.append(HintNode("wd", CursorHint(wd_start, acc.here())))
                acc.close_if(
                    self.tr(c),
                    lambda ta: children.append(self.exh_aux(ta, b, eval_mask)),
                )
            case V.CondAssert(c, t, e):
                label = "cond"
                wd_start = acc.here()
                if checked:
                    self.wd(acc, c, eval_mask, drop_wd)
                children.append(HintNode("wd", CursorHint(wd_start, acc.here())))
                acc.close_if(
                    self.tr(c),
                    lambda ta: children.append(self.exh_aux(ta, t, eval_mask)),
                    lambda ea: children.append(self.exh_aux(ea, e, eval_mask)),
                )
            case _:
                raise MalformedProgramError(f"bad assertion node: {a!r}")
        return HintNode(label, CursorHint(start, acc.here()),
                        bindings=bindings, children=tuple(children))

    def exhale(self, acc: Accum, a: V.VAssert, checked: bool) -> HintNode:
        start = acc.here()
        bindings: list[BindingHint] = []
        variants = [VariantHint(WD_CHECKED if checked else WD_OMITTED)]
        eval_mask = None
        if checked:
            eval_mask = self.fresh("WM", MTYPE)
            bindings.append(BindingHint(ROLE_EVAL_MASK, eval_mask))
            acc.emit(BAssign(eval_mask, _M))
        child = self.exh_aux(acc, a, eval_mask)
        if not V.acc_free(a):
            variants.append(VariantHint(SELECT_EMITTED))
            hp = self.fresh("Hp", HTYPE)
            bindings.append(BindingHint(ROLE_HAVOC_TARGET, hp))
            acc.emit(BHavoc(hp))
            if "exhale-idop-unconstrained" in self.mut:
                acc.emit(BAssume(BLit(True)))
            else:
                acc.emit(BAssume(BCall("idOnPositive", (), (_H, BVar(hp), _M))))
            acc.emit(BAssign(HEAP_VAR, BVar(hp)))
        else:
            variants.append(VariantHint(SELECT_OMITTED))
        self._goodmask(acc)
        return HintNode(
            "exhale", CursorHint(start, acc.here()),
            variants=tuple(variants), bindings=tuple(bindings),
            children=(child,),
        )

    # ----------------------------------------------------------- statements
    def stmt(self, acc: Accum, s: V.VStmt) -> HintNode:
        start = acc.here()
        bindings: tuple = ()
        children: list[HintNode] = []
        match s:
            case V.Skip():
                label = "skip"
            case V.LocalAssign(x, rhs):
                label = "local-assign"
                wd_start = acc.here()
                self.wd(acc, rhs, MASK_VAR)
                children.append(HintNode("wd", CursorHint(wd_start, acc.here())))
                acc.emit(BAssign(self.rec.var[x], self.tr(rhs)))
                self._goodmask(acc)
            case V.FieldAssign(rcv, f, rhs):
                label = "field-assign"
                drop_wd = "fieldassign-drop-wd-assert" in self.mut
                wd_start = acc.here()
                self.wd(acc, rcv, MASK_VAR, drop_wd)
                self.wd(acc, rhs, MASK_VAR, drop_wd)
                children.append(HintNode("wd", CursorHint(wd_start, acc.here())))
                if "fieldassign-drop-write-assert" not in self.mut:
                    if "fieldassign-weaken-write-assert" in self.mut:
                        check = BBin(self._field_mask_read(MASK_VAR, rcv, f),
                                     ">", _RZERO)
                    else:
                        check = BBin(self._field_mask_read(MASK_VAR, rcv, f),
                                     "==", _RONE)
                    acc.emit(BAssert(check))
                ft = btype_of(self.ctx.field_type(f))
                acc.emit(BAssign(HEAP_VAR, BCall(
                    "updHeap", (ft,),
                    (_H, self.tr(rcv), BVar(field_const(f)), self.tr(rhs)),
                )))
                self._goodmask(acc)
            case V.VarDecl(x, _t):
                label = "var-decl"
                bindings = (BindingHint(ROLE_SCOPED_VAR, self.rec.var[x]),)
                acc.emit(BHavoc(self.rec.var[x]))
                self._goodmask(acc)
            case V.Inhale(a):
                return self.inhale(acc, a, checked=True)
            case V.Exhale(a):
                return self.exhale(acc, a, checked=True)
            case V.VAssertStmt(a):
                label = "assert"
                wm = self.fresh("WM", MTYPE)
                bindings = (BindingHint(ROLE_EVAL_MASK, wm),)
                acc.emit(BAssign(wm, _M))
                children.append(self.exh_aux(acc, a, wm))
                acc.emit(BAssign(MASK_VAR, BVar(wm)))
                self._goodmask(acc)
            case V.MethodCall(targets, callee_name, args):
                label = "call"
                callee = self.program.method(callee_name)
                sub = {p: arg for (p, _), arg in zip(callee.params, args)}
                pre_s = V.subst_assert(callee.pre, sub)
                sub_post = dict(sub)
                for (r, _), tgt in zip(callee.returns, targets):
                    sub_post[r] = V.Var(tgt)
                post_s = V.subst_assert(callee.post, sub_post)
                children.append(self.exhale(acc, pre_s, checked=False))
                bindings = tuple(
                    BindingHint(ROLE_HAVOC_TARGET, self.rec.var[t])
                    for t in targets
                )
                for t in targets:
                    acc.emit(BHavoc(self.rec.var[t]))
                children.append(self.inhale(acc, post_s, checked=False))
                self._goodmask(acc)
            case V.If(c, t, e):
                label = "if"
                wd_start = acc.here()
                self.wd(acc, c, MASK_VAR)
                children.append(HintNode("wd", CursorHint(wd_start, acc.here())))
                acc.close_if(
                    self.tr(c),
                    lambda ta: children.append(self.stmt(ta, t)),
                    lambda ea: children.append(self.stmt(ea, e)),
                )
                self._goodmask(acc)
            case V.Seq(a, b):
                label = "seq"
                children.append(self.stmt(acc, a))
                children.append(self.stmt(acc, b))
            case _:
                raise MalformedProgramError(f"bad statement node: {s!r}")
        return HintNode(label, CursorHint(start, acc.here()),
                        bindings=bindings, children=tuple(children))


def proc_name(method: str) -> str:
    return "b_" + method


def translate_method(
    program: V.Program,
    m: V.Method,
    mutations: FrozenSet[str] = frozenset(),
) -> Tuple[BProc, MethodTranslation]:
    em = MethodEmitter(program, m, mutations)
    acc = Accum()
    start = acc.here()
    acc.emit(BAssign(MASK_VAR, BVar("ZeroMask")))

    pre_checked = "method-pre-wd-omitted" not in mutations
    children = [em.inhale(acc, m.pre, checked=pre_checked)]

    if "method-post-wf-omitted" not in mutations:
        wf_start = acc.here()
        inner: list[HintNode] = []

        def fill_wf(ta: Accum) -> None:
            for r, _t in m.returns:
                ta.emit(BHavoc(em.rec.var[r]))
            inner.append(em.inh_assert(ta, m.post, checked=True))
            ta.emit(BAssume(BLit(False)))

        acc.close_if(None, fill_wf)
        children.append(HintNode(
            "wf-post", CursorHint(wf_start, acc.here()),
            variants=(VariantHint(WD_CHECKED),),
            bindings=tuple(
                BindingHint(ROLE_HAVOC_TARGET, em.rec.var[r])
                for r, _ in m.returns
            ),
            children=tuple(inner),
        ))

    children.append(em.stmt(acc, m.body))
    children.append(em.exhale(acc, m.post, checked=True))

    params = tuple(
        (em.rec.var[n], btype_of(t)) for n, t in m.params + m.returns
    )
    declared = tuple(
        (em.rec.var[n], btype_of(t))
        for n, t in em.ctx.var_types[len(m.params) + len(m.returns):]
    )
    proc = BProc(proc_name(m.name), params,
                 declared + tuple(em.aux_locals), acc.done())
    root = HintNode("method", CursorHint(start, acc.here()),
                    children=tuple(children))
    return proc, MethodTranslation(m.name, proc.name, em.rec, root)


def translate_program(
    vp: V.Program,
    mutations: FrozenSet[str] = frozenset(),
) -> TranslationResult:
    type_decls, consts, funcs, axioms, globals_ = background_decls(vp.fields)
    procs = []
    methods = []
    for m in vp.methods:
        proc, mt = translate_method(vp, m, mutations)
        procs.append(proc)
        methods.append(mt)
    bprog = BProgram(type_decls, consts, funcs, axioms, globals_, tuple(procs))
    return TranslationResult(bprog, tuple(methods))
