"""AST for the supported Viper subset.

Programs consist of integer/boolean/reference/permission-typed field
declarations and methods.  Assertions are built from pure boolean expressions
and fractional accessibility predicates ``acc(e.f, p)`` combined with
separating conjunction, implication and conditionals.  Statements cover local
and field assignment, variable declaration, method calls, ``inhale`` /
``exhale`` / ``assert``, conditionals and sequencing.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Tuple, Union

from ..common import MalformedProgramError


class VType(enum.Enum):
    INT = "Int"
    BOOL = "Bool"
    REF = "Ref"
    PERM = "Perm"

    def __str__(self) -> str:  # pragma: no cover - trivial
        return self.value


@dataclass(frozen=True)
class Ref:
    """A reference value.  ``NULL`` is the distinguished null reference."""

    name: str

    def __repr__(self) -> str:
        return self.name


NULL = Ref("null")

# Runtime values: Python ints/bools, exact rationals for permissions, Refs.
VValue = Union[int, bool, Fraction, Ref]


# --------------------------------------------------------------------------
# Expressions
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Lit:
    value: VValue


@dataclass(frozen=True)
class FieldAcc:
    rcv: "VExpr"
    field: str


@dataclass(frozen=True)
class BinOp:
    left: "VExpr"
    op: str  # + - * / % == != < <= > >= && || ==>
    right: "VExpr"


@dataclass(frozen=True)
class UnOp:
    op: str  # ! -
    operand: "VExpr"


VExpr = Union[Var, Lit, FieldAcc, BinOp, UnOp]

ARITH_OPS = {"+", "-", "*", "/", "%"}
CMP_OPS = {"==", "!=", "<", "<=", ">", ">="}
BOOL_OPS = {"&&", "||", "==>"}


# --------------------------------------------------------------------------
# Assertions
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Pure:
    expr: VExpr


@dataclass(frozen=True)
class Acc:
    rcv: VExpr
    field: str
    perm: VExpr


@dataclass(frozen=True)
class Sep:
    left: "VAssert"
    right: "VAssert"


@dataclass(frozen=True)
class Implies:
    cond: VExpr
    body: "VAssert"


@dataclass(frozen=True)
class CondAssert:
    cond: VExpr
    then_a: "VAssert"
    else_a: "VAssert"


VAssert = Union[Pure, Acc, Sep, Implies, CondAssert]

TRUE_ASSERT = Pure(Lit(True))


# --------------------------------------------------------------------------
# Statements
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Skip:
    pass


@dataclass(frozen=True)
class LocalAssign:
    var: str
    rhs: VExpr


@dataclass(frozen=True)
class FieldAssign:
    rcv: VExpr
    field: str
    rhs: VExpr


@dataclass(frozen=True)
class VarDecl:
    var: str
    vtype: VType


@dataclass(frozen=True)
class MethodCall:
    targets: Tuple[str, ...]
    method: str
    args: Tuple[VExpr, ...]


@dataclass(frozen=True)
class Inhale:
    assertion: VAssert


@dataclass(frozen=True)
class Exhale:
    assertion: VAssert


@dataclass(frozen=True)
class VAssertStmt:
    assertion: VAssert


@dataclass(frozen=True)
class If:
    cond: VExpr
    then_s: "VStmt"
    else_s: "VStmt"


@dataclass(frozen=True)
class Seq:
    first: "VStmt"
    second: "VStmt"


VStmt = Union[
    Skip, LocalAssign, FieldAssign, VarDecl, MethodCall, Inhale, Exhale,
    VAssertStmt, If, Seq,
]


# --------------------------------------------------------------------------
# Declarations
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class FieldDecl:
    name: str
    vtype: VType


@dataclass(frozen=True)
class Method:
    name: str
    params: Tuple[Tuple[str, VType], ...]
    returns: Tuple[Tuple[str, VType], ...]
    pre: VAssert
    post: VAssert
    body: VStmt


@dataclass(frozen=True)
class Program:
    fields: Tuple[FieldDecl, ...]
    methods: Tuple[Method, ...]

    def field_map(self) -> dict[str, VType]:
        return {f.name: f.vtype for f in self.fields}

    def method(self, name: str) -> Method:
        for m in self.methods:
            if m.name == name:
                return m
        raise MalformedProgramError(f"unknown method: {name}")


def seq_of(stmts: list[VStmt]) -> VStmt:
    """Right-nested sequence of ``stmts`` (``Skip`` when empty)."""
    if not stmts:
        return Skip()
    out = stmts[-1]
    for s in reversed(stmts[:-1]):
        out = Seq(s, out)
    return out


def seq_list(s: VStmt) -> list[VStmt]:
    out: list[VStmt] = []

    def walk(t: VStmt) -> None:
        if isinstance(t, Seq):
            walk(t.first)
            walk(t.second)
        elif not isinstance(t, Skip):
            out.append(t)

    walk(s)
    return out


# --------------------------------------------------------------------------
# Traversals
# --------------------------------------------------------------------------

def subst_expr(e: VExpr, sub: dict[str, VExpr]) -> VExpr:
    match e:
        case Var(name):
            return sub.get(name, e)
        case Lit():
            return e
        case FieldAcc(rcv, f):
            return FieldAcc(subst_expr(rcv, sub), f)
        case BinOp(l, op, r):
            return BinOp(subst_expr(l, sub), op, subst_expr(r, sub))
        case UnOp(op, x):
            return UnOp(op, subst_expr(x, sub))
    raise MalformedProgramError(f"bad expression node: {e!r}")


def subst_assert(a: VAssert, sub: dict[str, VExpr]) -> VAssert:
    match a:
        case Pure(e):
            return Pure(subst_expr(e, sub))
        case Acc(rcv, f, p):
            return Acc(subst_expr(rcv, sub), f, subst_expr(p, sub))
        case Sep(l, r):
            return Sep(subst_assert(l, sub), subst_assert(r, sub))
        case Implies(c, b):
            return Implies(subst_expr(c, sub), subst_assert(b, sub))
        case CondAssert(c, t, f):
            return CondAssert(subst_expr(c, sub), subst_assert(t, sub), subst_assert(f, sub))
    raise MalformedProgramError(f"bad assertion node: {a!r}")


def expr_fields(e: VExpr, out: set[str]) -> None:
    match e:
        case FieldAcc(rcv, f):
            out.add(f)
            expr_fields(rcv, out)
        case BinOp(l, _, r):
            expr_fields(l, out)
            expr_fields(r, out)
        case UnOp(_, x):
            expr_fields(x, out)
        case _:
            pass


def assert_fields(a: VAssert, out: set[str]) -> None:
    match a:
        case Pure(e):
            expr_fields(e, out)
        case Acc(rcv, f, p):
            out.add(f)
            expr_fields(rcv, out)
            expr_fields(p, out)
        case Sep(l, r):
            assert_fields(l, out)
            assert_fields(r, out)
        case Implies(c, b):
            expr_fields(c, out)
            assert_fields(b, out)
        case CondAssert(c, t, f):
            expr_fields(c, out)
            assert_fields(t, out)
            assert_fields(f, out)


def acc_free(a: VAssert) -> bool:
    """True when ``a`` contains no accessibility predicate."""
    match a:
        case Pure():
            return True
        case Acc():
            return False
        case Sep(l, r):
            return acc_free(l) and acc_free(r)
        case Implies(_, b):
            return acc_free(b)
        case CondAssert(_, t, f):
            return acc_free(t) and acc_free(f)
    raise MalformedProgramError(f"bad assertion node: {a!r}")


def mentioned_fields(program: Program, m: Method) -> tuple[str, ...]:
    """Fields a method's execution can observe: those in its body and in every
    specification it can inhale/exhale (its own and those of called methods).

    Field locations outside this set never gain permission during execution of
    ``m``, so their heap values are unobservable; bounded enumeration can fix
    them to defaults without losing any behaviour.
    """
    out: set[str] = set()
    seen: set[str] = set()

    def walk_method(meth: Method) -> None:
        if meth.name in seen:
            return
        seen.add(meth.name)
        assert_fields(meth.pre, out)
        assert_fields(meth.post, out)

        def walk_stmt(s: VStmt) -> None:
            match s:
                case LocalAssign(_, rhs):
                    expr_fields(rhs, out)
                case FieldAssign(rcv, f, rhs):
                    out.add(f)
                    expr_fields(rcv, out)
                    expr_fields(rhs, out)
                case MethodCall(_, callee, args):
                    for arg in args:
                        expr_fields(arg, out)
                    walk_method(program.method(callee))
                case Inhale(a) | Exhale(a) | VAssertStmt(a):
                    assert_fields(a, out)
                case If(c, t, f):
                    expr_fields(c, out)
                    walk_stmt(t)
                    walk_stmt(f)
                case Seq(a_, b_):
                    walk_stmt(a_)
                    walk_stmt(b_)
                case _:
                    pass

        walk_stmt(meth.body)

    walk_method(m)
    declared = [f.name for f in program.fields]
    return tuple(f for f in declared if f in out)
