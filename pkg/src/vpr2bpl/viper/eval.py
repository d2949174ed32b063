"""Partial expression evaluation for the Viper subset.

Evaluation is big-step and partial: dividing by zero, or reading a field
location without positive permission (which subsumes dereferencing null),
makes the expression ill-defined.  The lazy boolean connectives ``&&``, ``||``
and ``==>`` only evaluate their right operand when its value is needed, so
``false && (1/0 == 1)`` is well-defined.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Tuple

from ..arith import DivisionByZero, apply_binop, apply_unop
from ..common import MalformedProgramError
from .ast import (
    BinOp, FieldAcc, Lit, Method, Program, Ref, UnOp, Var, VExpr, VType, VValue,
)
from .state import ViperState


class IllDefined(Exception):
    """The expression has no value in the given state."""


@dataclass(frozen=True)
class VCtx:
    """Static context for evaluating and executing one method."""

    program: Program
    method: Method
    field_types: Tuple[Tuple[str, VType], ...]
    var_types: Tuple[Tuple[str, VType], ...]

    def field_type(self, f: str) -> VType:
        for name, t in self.field_types:
            if name == f:
                return t
        raise MalformedProgramError(f"unknown field: {f}")

    def var_type(self, v: str) -> VType:
        for name, t in self.var_types:
            if name == v:
                return t
        raise MalformedProgramError(f"unknown variable: {v}")

    def has_var(self, v: str) -> bool:
        return any(name == v for name, _ in self.var_types)


def make_ctx(program: Program, m: Method, extra_vars: Tuple[Tuple[str, VType], ...] = ()) -> VCtx:
    """Context for method ``m``: parameters, returns, then local declarations."""
    from .ast import Seq, If, VarDecl, VStmt

    var_types: list[Tuple[str, VType]] = list(m.params) + list(m.returns) + list(extra_vars)
    seen = {n for n, _ in var_types}
    if len(seen) != len(var_types):
        raise MalformedProgramError(f"duplicate parameter/return names in {m.name}")

    def collect(s: VStmt) -> None:
        match s:
            case VarDecl(v, t):
                if any(n == v for n, _ in var_types):
                    raise MalformedProgramError(f"re-declaration of {v} in {m.name}")
                var_types.append((v, t))
            case Seq(a, b):
                collect(a)
                collect(b)
            case If(_, t, f):
                collect(t)
                collect(f)
            case _:
                pass

    collect(m.body)
    return VCtx(program, m, tuple((f.name, f.vtype) for f in program.fields), tuple(var_types))


def eval_expr(ctx: VCtx, state: ViperState, e: VExpr) -> VValue:
    match e:
        case Var(name):
            try:
                return state.store[name]
            except KeyError:
                raise MalformedProgramError(f"unbound variable: {name}") from None
        case Lit(v):
            return v
        case FieldAcc(rcv, f):
            r = eval_expr(ctx, state, rcv)
            if not isinstance(r, Ref):
                raise MalformedProgramError(f"field access on non-reference: {f}")
            if state.perm_at((r, f)) <= 0:
                raise IllDefined()
            return state.heap[(r, f)]
        case BinOp(l, op, r):
            lv = eval_expr(ctx, state, l)
            if op in ("&&", "||", "==>"):
                if not isinstance(lv, bool):
                    raise MalformedProgramError(f"{op} on non-boolean")
                if op == "&&" and lv is False:
                    return False
                if op == "||" and lv is True:
                    return True
                if op == "==>" and lv is False:
                    return True
                rv = eval_expr(ctx, state, r)
                if not isinstance(rv, bool):
                    raise MalformedProgramError(f"{op} on non-boolean")
                return rv
            rv = eval_expr(ctx, state, r)
            try:
                return apply_binop(op, lv, rv)
            except DivisionByZero:
                raise IllDefined() from None
        case UnOp(op, x):
            return apply_unop(op, eval_expr(ctx, state, x))
    raise MalformedProgramError(f"bad expression node: {e!r}")


def eval_bool(ctx: VCtx, state: ViperState, e: VExpr) -> bool:
    v = eval_expr(ctx, state, e)
    if not isinstance(v, bool):
        raise MalformedProgramError("expected a boolean expression")
    return v


def eval_perm(ctx: VCtx, state: ViperState, e: VExpr) -> Fraction:
    v = eval_expr(ctx, state, e)
    if isinstance(v, bool) or not isinstance(v, (int, Fraction)):
        raise MalformedProgramError("expected a permission expression")
    return Fraction(v)


def eval_ref(ctx: VCtx, state: ViperState, e: VExpr) -> Ref:
    v = eval_expr(ctx, state, e)
    if not isinstance(v, Ref):
        raise MalformedProgramError("expected a reference expression")
    return v


def is_defined(ctx: VCtx, state: ViperState, e: VExpr) -> bool:
    try:
        eval_expr(ctx, state, e)
        return True
    except IllDefined:
        return False
