"""Pretty-printer for the Boogie subset (standard Boogie surface syntax).

Rational literals print as real literals or parenthesised real divisions
(``(1.0 / 2.0)``), which the reader folds back into exact rationals.
Polymorphic function calls print without explicit type arguments; the reader
reconstructs them by unifying argument types against the function signature.
"""

from __future__ import annotations

from fractions import Fraction

from ..common import MalformedProgramError
from .ast import (
    BAssert, BAssign, BAssume, BBin, BCall, BExists, BExpr, BForall, BHavoc,
    BLit, BOOL, BProc, BProgram, BStmt, BType, BTypeForall, BUn, BVar, Block,
    INT, REAL, TCon, TVar,
)

_PREC = {
    "==>": 2, "||": 3, "&&": 4,
    "==": 5, "!=": 5, "<": 5, "<=": 5, ">": 5, ">=": 5,
    "+": 6, "-": 6, "*": 7, "/": 7, "%": 7,
}
_UNARY_PREC = 8
_ATOM_PREC = 9


def print_btype(t: BType) -> str:
    match t:
        case TCon(name, args):
            if not args:
                return name
            return name + " " + " ".join(_btype_atom(a) for a in args)
        case TVar(name):
            return name
        case _:
            return t.name  # builtin


def _btype_atom(t: BType) -> str:
    s = print_btype(t)
    if isinstance(t, TCon) and t.args:
        return f"({s})"
    return s


def print_bexpr(e: BExpr, min_prec: int = 0) -> str:
    text, prec = _expr(e)
    if prec < min_prec:
        return f"({text})"
    return text


def _expr(e: BExpr) -> tuple[str, int]:
    match e:
        case BVar(name):
            return name, _ATOM_PREC
        case BLit(v):
            return _lit(v)
        case BBin(l, op, r):
            p = _PREC[op]
            if op == "==>":
                return f"{print_bexpr(l, p + 1)} {op} {print_bexpr(r, p)}", p
            if op in ("==", "!=", "<", "<=", ">", ">="):
                return f"{print_bexpr(l, p + 1)} {op} {print_bexpr(r, p + 1)}", p
            return f"{print_bexpr(l, p)} {op} {print_bexpr(r, p + 1)}", p
        case BUn(op, x):
            return f"{op}{print_bexpr(x, _UNARY_PREC)}", _UNARY_PREC
        case BCall(fn, _targs, args):
            return f"{fn}({', '.join(print_bexpr(a) for a in args)})", _ATOM_PREC
        case BForall(binders, tvars, body):
            return _quant("forall", binders, tvars, body), _ATOM_PREC
        case BExists(binders, tvars, body):
            return _quant("exists", binders, tvars, body), _ATOM_PREC
        case BTypeForall(tvars, body):
            return _quant("forall", (), tvars, body), _ATOM_PREC
    raise MalformedProgramError(f"bad expression node: {e!r}")


def _quant(kw: str, binders, tvars, body) -> str:
    parts = [kw]
    if tvars:
        parts.append("<" + ", ".join(tvars) + ">")
    if binders:
        parts.append(", ".join(f"{n}: {print_btype(t)}" for n, t in binders))
    return f"({' '.join(parts)} :: {print_bexpr(body)})"


def _lit(v) -> tuple[str, int]:
    if isinstance(v, bool):
        return ("true" if v else "false"), _ATOM_PREC
    if isinstance(v, Fraction):
        if v < 0:
            return f"-({-v.numerator}.0 / {v.denominator}.0)", _UNARY_PREC
        if v.denominator == 1:
            return f"{v.numerator}.0", _ATOM_PREC
        return f"{v.numerator}.0 / {v.denominator}.0", _PREC["/"]
    if isinstance(v, int):
        if v < 0:
            return f"-{-v}", _UNARY_PREC
        return str(v), _ATOM_PREC
    raise MalformedProgramError(f"bad literal: {v!r}")


def _print_stmt(body: BStmt, indent: int, out: list[str]) -> None:
    pad = "    " * indent
    for blk in body:
        for cmd in blk.cmds:
            match cmd:
                case BAssume(e):
                    out.append(f"{pad}assume {print_bexpr(e)};")
                case BAssert(e):
                    out.append(f"{pad}assert {print_bexpr(e)};")
                case BAssign(x, e):
                    out.append(f"{pad}{x} := {print_bexpr(e)};")
                case BHavoc(x):
                    out.append(f"{pad}havoc {x};")
                case _:
                    raise MalformedProgramError(f"bad command {cmd!r}")
        if blk.branch is not None:
            cond = "*" if blk.branch.cond is None else print_bexpr(blk.branch.cond)
            out.append(f"{pad}if ({cond}) {{")
            _print_stmt(blk.branch.then_s, indent + 1, out)
            if blk.branch.else_s:
                out.append(f"{pad}}} else {{")
                _print_stmt(blk.branch.else_s, indent + 1, out)
            out.append(f"{pad}}}")


def print_proc(p: BProc, out: list[str]) -> None:
    params = ", ".join(f"{n}: {print_btype(t)}" for n, t in p.params)
    out.append(f"procedure {p.name}({params})")
    out.append("{")
    for n, t in p.locals_:
        out.append(f"    var {n}: {print_btype(t)};")
    if p.locals_:
        out.append("")
    _print_stmt(p.body, 1, out)
    out.append("}")


def print_bprogram(p: BProgram) -> str:
    out: list[str] = []
    for name, arity in p.type_decls:
        tvars = " ".join(f"T{i}" for i in range(arity))
        out.append(f"type {name}{(' ' + tvars) if tvars else ''};")
    for name, t in p.consts:
        out.append(f"const {name}: {print_btype(t)};")
    for f in p.funcs:
        tv = f"<{', '.join(f.tvars)}>" if f.tvars else ""
        params = ", ".join(f"{n}: {print_btype(t)}" for n, t in f.params)
        out.append(
            f"function {f.name}{tv}({params}) returns ({print_btype(f.ret)});"
        )
    for ax in p.axioms:
        out.append(f"axiom {print_bexpr(ax)};")
    for name, t in p.globals_:
        out.append(f"var {name}: {print_btype(t)};")
    for proc in p.procs:
        out.append("")
        print_proc(proc, out)
    return "\n".join(out) + "\n"
