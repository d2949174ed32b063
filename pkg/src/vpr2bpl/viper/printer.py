"""Canonical pretty-printer for the Viper subset.

Printing a typechecked program and re-loading the result (parse followed by
typecheck) yields a structurally identical AST.  Rational permission literals
print as parenthesised divisions (``(1/2)``), which the typechecker folds back
into exact rational literals.
"""

from __future__ import annotations

from fractions import Fraction

from ..common import MalformedProgramError
from .ast import (
    Acc, BinOp, CondAssert, Exhale, FieldAcc, FieldAssign, If, Implies,
    Inhale, Lit, LocalAssign, Method, MethodCall, NULL, Program, Pure, Ref,
    Sep, Seq, Skip, UnOp, Var, VarDecl, VAssert, VAssertStmt, VExpr, VStmt,
    seq_list,
)

_PREC = {
    "?:": 1, "==>": 2, "||": 3, "&&": 4,
    "==": 5, "!=": 5, "<": 5, "<=": 5, ">": 5, ">=": 5,
    "+": 6, "-": 6, "*": 7, "/": 7, "%": 7,
}
_UNARY_PREC = 8
_ATOM_PREC = 9


def print_expr(e: VExpr, min_prec: int = 0) -> str:
    text, prec = _expr(e)
    if prec < min_prec:
        return f"({text})"
    return text


def _expr(e: VExpr) -> tuple[str, int]:
    match e:
        case Var(name):
            return name, _ATOM_PREC
        case Lit(v):
            return _lit(v)
        case FieldAcc(rcv, f):
            return f"{print_expr(rcv, _ATOM_PREC)}.{f}", _ATOM_PREC
        case BinOp(l, op, r):
            p = _PREC[op]
            if op == "==>":  # right-associative
                return f"{print_expr(l, p + 1)} {op} {print_expr(r, p)}", p
            if op in ("==", "!=", "<", "<=", ">", ">="):  # non-associative
                return f"{print_expr(l, p + 1)} {op} {print_expr(r, p + 1)}", p
            return f"{print_expr(l, p)} {op} {print_expr(r, p + 1)}", p
        case UnOp(op, x):
            return f"{op}{print_expr(x, _UNARY_PREC)}", _UNARY_PREC
    raise MalformedProgramError(f"bad expression node: {e!r}")


def _lit(v) -> tuple[str, int]:
    if isinstance(v, bool):
        return ("true" if v else "false"), _ATOM_PREC
    if isinstance(v, Fraction):
        if v < 0:
            return f"-({-v.numerator}/{v.denominator})", _UNARY_PREC
        return f"{v.numerator}/{v.denominator}", _PREC["/"]
    if isinstance(v, int):
        if v < 0:
            return f"-{-v}", _UNARY_PREC
        return str(v), _ATOM_PREC
    if isinstance(v, Ref):
        if v == NULL:
            return "null", _ATOM_PREC
        raise MalformedProgramError("non-null reference literals are not printable")
    raise MalformedProgramError(f"bad literal: {v!r}")


def print_assert(a: VAssert, min_prec: int = 0) -> str:
    text, prec = _assertion(a)
    if prec < min_prec:
        return f"({text})"
    return text


def _assertion(a: VAssert) -> tuple[str, int]:
    match a:
        case Pure(e):
            return _expr(e)
        case Acc(rcv, f, p):
            return f"acc({print_expr(rcv, _ATOM_PREC)}.{f}, {print_expr(p)})", _ATOM_PREC
        case Sep(l, r):
            p = _PREC["&&"]
            return f"{print_assert(l, p)} && {print_assert(r, p + 1)}", p
        case Implies(c, b):
            p = _PREC["==>"]
            return f"{print_expr(c, p + 1)} ==> {print_assert(b, p)}", p
        case CondAssert(c, t, f):
            p = _PREC["?:"]
            return (
                f"{print_expr(c, p + 1)} ? {print_assert(t, p + 1)} : {print_assert(f, p + 1)}",
                p,
            )
    raise MalformedProgramError(f"bad assertion node: {a!r}")


def _print_stmt(s: VStmt, indent: int, out: list[str]) -> None:
    pad = "    " * indent
    match s:
        case Skip():
            pass
        case LocalAssign(v, rhs):
            out.append(f"{pad}{v} := {print_expr(rhs)}")
        case FieldAssign(rcv, f, rhs):
            out.append(f"{pad}{print_expr(rcv, _ATOM_PREC)}.{f} := {print_expr(rhs)}")
        case VarDecl(v, t):
            out.append(f"{pad}var {v}: {t.value}")
        case MethodCall(targets, name, args):
            call = f"{name}({', '.join(print_expr(a) for a in args)})"
            if targets:
                out.append(f"{pad}{', '.join(targets)} := {call}")
            else:
                out.append(f"{pad}{call}")
        case Inhale(a):
            out.append(f"{pad}inhale {print_assert(a)}")
        case Exhale(a):
            out.append(f"{pad}exhale {print_assert(a)}")
        case VAssertStmt(a):
            out.append(f"{pad}assert {print_assert(a)}")
        case If(c, t, e):
            out.append(f"{pad}if ({print_expr(c)}) {{")
            _print_block(t, indent + 1, out)
            if isinstance(e, Skip):
                out.append(f"{pad}}}")
            else:
                out.append(f"{pad}}} else {{")
                _print_block(e, indent + 1, out)
                out.append(f"{pad}}}")
        case Seq():
            _print_block(s, indent, out)
        case _:
            raise MalformedProgramError(f"bad statement node: {s!r}")


def _print_block(s: VStmt, indent: int, out: list[str]) -> None:
    for item in seq_list(s):
        _print_stmt(item, indent, out)


def print_method(m: Method, out: list[str]) -> None:
    params = ", ".join(f"{n}: {t.value}" for n, t in m.params)
    head = f"method {m.name}({params})"
    if m.returns:
        rets = ", ".join(f"{n}: {t.value}" for n, t in m.returns)
        head += f" returns ({rets})"
    out.append(head)
    out.append(f"    requires {print_assert(m.pre)}")
    out.append(f"    ensures {print_assert(m.post)}")
    out.append("{")
    _print_block(m.body, 1, out)
    out.append("}")


def print_program(p: Program) -> str:
    out: list[str] = []
    for f in p.fields:
        out.append(f"field {f.name}: {f.vtype.value}")
    for m in p.methods:
        if out:
            out.append("")
        print_method(m, out)
    return "\n".join(out) + "\n"
