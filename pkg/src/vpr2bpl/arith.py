"""Value-level arithmetic shared by the Viper and Boogie evaluators.

Keeping one implementation on both sides guarantees that the two semantics
agree on operator meaning: exact rationals for permission arithmetic,
arbitrary-precision integers with floor division/modulo, and heterogeneous
equality that never coerces across types (comparing values of different kinds
yields inequality rather than an error).
"""

from __future__ import annotations

from fractions import Fraction

from .common import MalformedProgramError


class DivisionByZero(Exception):
    """Raised on a zero divisor; callers decide whether that is ill-definedness
    (Viper) or gets totalised to zero (Boogie)."""


def _is_num(v) -> bool:
    return (isinstance(v, int) and not isinstance(v, bool)) or isinstance(v, Fraction)


def _kind(v) -> str:
    if isinstance(v, bool):
        return "bool"
    if isinstance(v, int):
        return "int"
    if isinstance(v, Fraction):
        return "rat"
    return "ref"


def apply_binop(op: str, left, right):
    if op in ("==", "!="):
        if _is_num(left) and _is_num(right):
            eq = Fraction(left) == Fraction(right)
        elif _kind(left) == _kind(right):
            eq = left == right
        else:
            eq = False
        return eq if op == "==" else not eq

    if op in ("&&", "||", "==>"):
        if not isinstance(left, bool) or not isinstance(right, bool):
            raise MalformedProgramError(f"boolean operator {op} on non-booleans")
        if op == "&&":
            return left and right
        if op == "||":
            return left or right
        return (not left) or right

    if not (_is_num(left) and _is_num(right)):
        raise MalformedProgramError(f"arithmetic operator {op} on non-numbers")

    if op in ("<", "<=", ">", ">="):
        lf, rf = Fraction(left), Fraction(right)
        return {"<": lf < rf, "<=": lf <= rf, ">": lf > rf, ">=": lf >= rf}[op]

    rational = isinstance(left, Fraction) or isinstance(right, Fraction)
    if op == "+":
        return left + right
    if op == "-":
        return left - right
    if op == "*":
        return left * right
    if op == "/":
        if right == 0:
            raise DivisionByZero()
        if rational:
            return Fraction(left) / Fraction(right)
        return left // right
    if op == "%":
        if right == 0:
            raise DivisionByZero()
        if rational:
            raise MalformedProgramError("modulo on rationals")
        return left % right
    raise MalformedProgramError(f"unknown operator: {op}")


def apply_unop(op: str, v):
    if op == "!":
        if not isinstance(v, bool):
            raise MalformedProgramError("negation on non-boolean")
        return not v
    if op == "-":
        if not _is_num(v):
            raise MalformedProgramError("unary minus on non-number")
        return -v
    raise MalformedProgramError(f"unknown unary operator: {op}")
