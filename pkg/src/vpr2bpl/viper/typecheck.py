"""Static checking and normalisation for parsed Viper programs.

Beyond the usual checks (declared names, operator typing, call arities) this
pass normalises permission arithmetic: every literal-only subexpression in a
permission-typed position is constant-folded to an exact rational literal, so
``acc(x.f, 1/2)`` carries ``Fraction(1, 2)`` rather than an integer division.
The evaluators and the translator both rely on this normal form.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Optional

from ..arith import DivisionByZero, apply_binop, apply_unop
from ..common import MalformedProgramError
from .ast import (
    Acc, BinOp, CondAssert, Exhale, FieldAcc, FieldAssign, FieldDecl, If,
    Implies, Inhale, Lit, LocalAssign, Method, MethodCall, Program, Pure,
    Ref, Sep, Seq, Skip, UnOp, Var, VarDecl, VAssert, VAssertStmt, VExpr,
    VStmt, VType,
)


class TypeError_(MalformedProgramError):
    pass


def _lit_type(v) -> VType:
    if isinstance(v, bool):
        return VType.BOOL
    if isinstance(v, Fraction):
        return VType.PERM
    if isinstance(v, int):
        return VType.INT
    if isinstance(v, Ref):
        return VType.REF
    raise TypeError_(f"bad literal: {v!r}")


def _is_literal_only(e: VExpr) -> bool:
    match e:
        case Lit():
            return True
        case BinOp(l, op, r) if op in ("+", "-", "*", "/"):
            return _is_literal_only(l) and _is_literal_only(r)
        case UnOp("-", x):
            return _is_literal_only(x)
        case _:
            return False


def _fold_perm(e: VExpr) -> Fraction:
    match e:
        case Lit(v):
            if isinstance(v, bool) or not isinstance(v, (int, Fraction)):
                raise TypeError_("permission literal expected")
            return Fraction(v)
        case BinOp(l, op, r):
            try:
                return Fraction(apply_binop(op, _fold_perm(l), _fold_perm(r)))
            except DivisionByZero:
                raise TypeError_("division by zero in permission literal") from None
        case UnOp("-", x):
            return -_fold_perm(x)
    raise TypeError_(f"cannot fold {e!r}")


class _Checker:
    def __init__(self, program: Program):
        self.program = program
        self.fields = {}
        for f in program.fields:
            if f.name in self.fields:
                raise TypeError_(f"duplicate field {f.name}")
            self.fields[f.name] = f.vtype
        names = [m.name for m in program.methods]
        if len(names) != len(set(names)):
            raise TypeError_("duplicate method names")

    # ------------------------------------------------------------ exprs
    def expr(self, e: VExpr, env: dict[str, VType], expected: Optional[VType] = None):
        e2, t = self._expr(e, env, expected)
        if expected is not None and t != expected:
            raise TypeError_(f"expected {expected.value}, found {t.value}: {e!r}")
        return e2, t

    def _expr(self, e: VExpr, env: dict[str, VType], expected: Optional[VType]):
        if expected is VType.PERM and _is_literal_only(e):
            return Lit(_fold_perm(e)), VType.PERM
        match e:
            case Var(name):
                if name not in env:
                    raise TypeError_(f"unbound variable {name}")
                actual, t = env[name]
                return Var(actual), t
            case Lit(v):
                if isinstance(v, int) and not isinstance(v, bool):
                    if v < 0:
                        return e, VType.INT
                    return e, VType.INT
                return e, _lit_type(v)
            case UnOp("-", Lit(v)) if isinstance(v, int) and not isinstance(v, bool):
                return Lit(-v), VType.INT
            case FieldAcc(rcv, f):
                if f not in self.fields:
                    raise TypeError_(f"unknown field {f}")
                rcv2, _ = self.expr(rcv, env, VType.REF)
                return FieldAcc(rcv2, f), self.fields[f]
            case BinOp(l, op, r):
                return self._binop(l, op, r, env, expected)
            case UnOp("!", x):
                x2, _ = self.expr(x, env, VType.BOOL)
                return UnOp("!", x2), VType.BOOL
            case UnOp("-", x):
                x2, t = self.expr(x, env, expected)
                if t not in (VType.INT, VType.PERM):
                    raise TypeError_("unary minus on non-number")
                return UnOp("-", x2), t
        raise TypeError_(f"bad expression node: {e!r}")

    def _binop(self, l, op, r, env, expected):
        if op in ("&&", "||", "==>"):
            l2, _ = self.expr(l, env, VType.BOOL)
            r2, _ = self.expr(r, env, VType.BOOL)
            return BinOp(l2, op, r2), VType.BOOL
        if op in ("==", "!="):
            l2, lt = self.expr(l, env)
            r2, rt = self.expr(r, env)
            if {lt, rt} == {VType.INT, VType.PERM}:
                l2, _ = self.expr(l, env, VType.PERM)
                r2, _ = self.expr(r, env, VType.PERM)
            elif lt != rt:
                raise TypeError_(f"comparing {lt.value} with {rt.value}")
            return BinOp(l2, op, r2), VType.BOOL
        if op in ("<", "<=", ">", ">="):
            l2, lt = self.expr(l, env)
            r2, rt = self.expr(r, env)
            if VType.PERM in (lt, rt):
                l2, _ = self.expr(l, env, VType.PERM)
                r2, _ = self.expr(r, env, VType.PERM)
            elif lt is not VType.INT or rt is not VType.INT:
                raise TypeError_(f"ordering {lt.value} with {rt.value}")
            return BinOp(l2, op, r2), VType.BOOL
        if op in ("+", "-", "*", "/", "%"):
            want = expected if expected in (VType.INT, VType.PERM) else None
            l2, lt = self.expr(l, env, want)
            r2, rt = self.expr(r, env, want)
            if VType.PERM in (lt, rt):
                if op == "%":
                    raise TypeError_("modulo on permissions")
                l2, _ = self.expr(l, env, VType.PERM)
                r2, _ = self.expr(r, env, VType.PERM)
                return BinOp(l2, op, r2), VType.PERM
            if lt is not VType.INT or rt is not VType.INT:
                raise TypeError_(f"arithmetic on {lt.value} and {rt.value}")
            return BinOp(l2, op, r2), VType.INT
        raise TypeError_(f"unknown operator {op}")

    # -------------------------------------------------------- assertions
    def assertion(self, a: VAssert, env: dict[str, VType]) -> VAssert:
        match a:
            case Pure(e):
                e2, _ = self.expr(e, env, VType.BOOL)
                return Pure(e2)
            case Acc(rcv, f, p):
                if f not in self.fields:
                    raise TypeError_(f"unknown field {f}")
                rcv2, _ = self.expr(rcv, env, VType.REF)
                p2, _ = self.expr(p, env, VType.PERM)
                return Acc(rcv2, f, p2)
            case Sep(l, r):
                return Sep(self.assertion(l, env), self.assertion(r, env))
            case Implies(c, b):
                c2, _ = self.expr(c, env, VType.BOOL)
                return Implies(c2, self.assertion(b, env))
            case CondAssert(c, t, f):
                c2, _ = self.expr(c, env, VType.BOOL)
                return CondAssert(c2, self.assertion(t, env), self.assertion(f, env))
        raise TypeError_(f"bad assertion node: {a!r}")

    # -------------------------------------------------------- statements
    #
    # ``env`` maps source variable names to (actual name, type).  Scoped
    # declarations that shadow an outer variable are alpha-renamed to a fresh
    # name, so downstream passes can treat the store as flat.
    def _fresh(self, base: str) -> str:
        name = base
        k = 2
        while name in self.used:
            name = f"{base}_{k}"
            k += 1
        self.used.add(name)
        return name

    def block(self, s: VStmt, outer_env: dict) -> VStmt:
        from .ast import seq_list, seq_of

        env = dict(outer_env)
        declared_here: set[str] = set()
        out: list[VStmt] = []
        for item in seq_list(s):
            if isinstance(item, VarDecl):
                if item.var in declared_here:
                    raise TypeError_(f"re-declaration of {item.var} in the same scope")
                actual = self._fresh(item.var)
                declared_here.add(item.var)
                env[item.var] = (actual, item.vtype)
                out.append(VarDecl(actual, item.vtype))
            else:
                out.append(self.stmt(item, env))
        return seq_of(out)

    def stmt(self, s: VStmt, env: dict) -> VStmt:
        match s:
            case Skip():
                return s
            case LocalAssign(v, rhs):
                if v not in env:
                    raise TypeError_(f"unbound variable {v}")
                actual, t = env[v]
                rhs2, _ = self.expr(rhs, env, t)
                return LocalAssign(actual, rhs2)
            case FieldAssign(rcv, f, rhs):
                if f not in self.fields:
                    raise TypeError_(f"unknown field {f}")
                rcv2, _ = self.expr(rcv, env, VType.REF)
                rhs2, _ = self.expr(rhs, env, self.fields[f])
                return FieldAssign(rcv2, f, rhs2)
            case MethodCall(targets, name, args):
                callee = self.program.method(name)
                if len(args) != len(callee.params):
                    raise TypeError_(f"wrong argument count calling {name}")
                if len(targets) != len(callee.returns):
                    raise TypeError_(f"wrong target count calling {name}")
                if len(set(targets)) != len(targets):
                    raise TypeError_("call targets must be distinct")
                args2 = []
                for arg, (_, pt) in zip(args, callee.params):
                    if not isinstance(arg, (Var, Lit, UnOp)) or (
                        isinstance(arg, UnOp) and not _is_literal_only(arg)
                    ):
                        raise TypeError_(
                            "call arguments must be variables or literals"
                        )
                    arg2, _ = self.expr(arg, env, pt)
                    args2.append(arg2)
                actual_targets = []
                for tgt, (_, rt) in zip(targets, callee.returns):
                    if tgt not in env:
                        raise TypeError_(f"unbound call target {tgt}")
                    actual, tt = env[tgt]
                    if tt != rt:
                        raise TypeError_(f"call target {tgt} has the wrong type")
                    actual_targets.append(actual)
                for tgt in actual_targets:
                    for arg in args2:
                        if isinstance(arg, Var) and arg.name == tgt:
                            raise TypeError_("call targets may not appear as arguments")
                return MethodCall(tuple(actual_targets), name, tuple(args2))
            case Inhale(a):
                return Inhale(self.assertion(a, env))
            case Exhale(a):
                return Exhale(self.assertion(a, env))
            case VAssertStmt(a):
                return VAssertStmt(self.assertion(a, env))
            case If(c, t, e):
                c2, _ = self.expr(c, env, VType.BOOL)
                return If(c2, self.block(t, env), self.block(e, env))
            case Seq():
                return self.block(s, env)
        raise TypeError_(f"bad statement node: {s!r}")

    # ----------------------------------------------------------- methods
    def method(self, m: Method) -> Method:
        binders = list(m.params) + list(m.returns)
        names = [n for n, _ in binders]
        if len(set(names)) != len(names):
            raise TypeError_(f"duplicate parameter/return names in {m.name}")
        self.used = set(names)
        pre_env = {n: (n, t) for n, t in m.params}
        pre = self.assertion(m.pre, pre_env)
        post_env = {n: (n, t) for n, t in binders}
        post = self.assertion(m.post, post_env)
        body = self.block(m.body, dict(post_env))
        return Method(m.name, m.params, m.returns, pre, post, body)


def check_program(p: Program) -> Program:
    """Typecheck and normalise; raises :class:`MalformedProgramError` on any
    static error."""
    checker = _Checker(p)
    return Program(p.fields, tuple(checker.method(m) for m in p.methods))


def load_program(src: str) -> Program:
    from .parser import parse_program

    return check_program(parse_program(src))
