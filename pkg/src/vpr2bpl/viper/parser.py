"""Recursive-descent parser for the Viper subset.

The grammar covers field declarations, methods with ``requires``/``ensures``
clauses, and the supported statements.  Assertions reuse the expression
grammar: in assertion position, ``&&`` denotes separating conjunction, ``==>``
with an assertion right-hand side denotes assertion implication, ``c ? A : B``
a conditional assertion, and ``acc(e.f, p)`` an accessibility predicate.
Errors carry line/column positions.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from ..common import ParseError
from ..lexer import TokenStream, tokenize
from .ast import (
    Acc, BinOp, CondAssert, Exhale, FieldAcc, FieldAssign, FieldDecl, If,
    Implies, Inhale, Lit, LocalAssign, Method, MethodCall, NULL, Program,
    Pure, Sep, Seq, Skip, UnOp, Var, VarDecl, VAssert, VAssertStmt, VExpr,
    VStmt, VType, seq_of,
)

SYMBOLS = [
    "==>", "==", "!=", "<=", ">=", "&&", "||", ":=",
    "(", ")", "{", "}", "[", "]", ",", ":", ".", "?",
    "+", "-", "*", "/", "%", "<", ">", "!", "=",
]

KEYWORDS = {
    "field", "method", "returns", "requires", "ensures", "var", "if", "else",
    "inhale", "exhale", "assert", "acc", "true", "false", "null", "write",
    "none", "Int", "Bool", "Ref", "Perm",
}


# Pseudo-expression nodes used only during parsing; converted to assertion
# nodes (or rejected) before the parser returns.
@dataclass(frozen=True)
class _AccExpr:
    rcv: VExpr
    field: str
    perm: VExpr


@dataclass(frozen=True)
class _Ternary:
    cond: VExpr
    then_e: VExpr
    else_e: VExpr


class ViperParser:
    def __init__(self, src: str):
        self.ts = TokenStream(tokenize(src, SYMBOLS))

    # ------------------------------------------------------------ program
    def parse_program(self) -> Program:
        fields: list[FieldDecl] = []
        methods: list[Method] = []
        while self.ts.peek().kind != "EOF":
            if self.ts.at_kw("field"):
                fields.append(self.parse_field())
            elif self.ts.at_kw("method"):
                methods.append(self.parse_method())
            else:
                self.ts.error("expected 'field' or 'method'")
        return Program(tuple(fields), tuple(methods))

    def parse_field(self) -> FieldDecl:
        self.ts.expect_kw("field")
        name = self.ts.expect_ident().text
        self.ts.expect_sym(":")
        return FieldDecl(name, self.parse_type())

    def parse_type(self) -> VType:
        t = self.ts.expect_ident()
        try:
            return VType(t.text)
        except ValueError:
            raise ParseError(f"unknown type {t.text!r}", t.line, t.col) from None

    def parse_method(self) -> Method:
        self.ts.expect_kw("method")
        name = self.ts.expect_ident().text
        params = self.parse_binders()
        returns: tuple = ()
        if self.ts.at_kw("returns"):
            self.ts.next()
            returns = self.parse_binders()
        pre: list[VAssert] = []
        post: list[VAssert] = []
        while self.ts.at_kw("requires", "ensures"):
            kw = self.ts.next().text
            (pre if kw == "requires" else post).append(self.parse_assertion())
        body = self.parse_block()
        return Method(name, params, returns, _conjoin(pre), _conjoin(post), body)

    def parse_binders(self) -> tuple:
        self.ts.expect_sym("(")
        out = []
        while not self.ts.at_sym(")"):
            if out:
                self.ts.expect_sym(",")
            n = self.ts.expect_ident().text
            self.ts.expect_sym(":")
            out.append((n, self.parse_type()))
        self.ts.expect_sym(")")
        return tuple(out)

    # ---------------------------------------------------------- statements
    def parse_block(self) -> VStmt:
        self.ts.expect_sym("{")
        stmts: list[VStmt] = []
        while not self.ts.at_sym("}"):
            stmts.append(self.parse_stmt())
        self.ts.expect_sym("}")
        return seq_of(stmts)

    def parse_stmt(self) -> VStmt:
        ts = self.ts
        if ts.at_kw("var"):
            ts.next()
            name = ts.expect_ident().text
            ts.expect_sym(":")
            return VarDecl(name, self.parse_type())
        if ts.at_kw("inhale"):
            ts.next()
            return Inhale(self.parse_assertion())
        if ts.at_kw("exhale"):
            ts.next()
            return Exhale(self.parse_assertion())
        if ts.at_kw("assert"):
            ts.next()
            return VAssertStmt(self.parse_assertion())
        if ts.at_kw("if"):
            ts.next()
            ts.expect_sym("(")
            cond = self.parse_expr()
            ts.expect_sym(")")
            then_s = self.parse_block()
            else_s: VStmt = Skip()
            if ts.at_kw("else"):
                ts.next()
                else_s = self.parse_block()
            return If(cond, then_s, else_s)

        # Assignment, call, or field assignment.
        start = ts.expect_ident()
        if start.text in KEYWORDS:
            raise ParseError(f"unexpected keyword {start.text!r}", start.line, start.col)
        if ts.at_sym("("):  # call without targets
            return self.parse_call((), start.text)
        if ts.at_sym("."):
            rcv: VExpr = Var(start.text)
            ts.next()
            fld = ts.expect_ident().text
            ts.expect_sym(":=")
            return FieldAssign(rcv, fld, self.parse_expr())
        targets = [start.text]
        while ts.at_sym(","):
            ts.next()
            targets.append(ts.expect_ident().text)
        ts.expect_sym(":=")
        if (
            ts.peek().kind == "IDENT"
            and ts.peek().text not in KEYWORDS
            and ts.peek(1).kind == "SYM"
            and ts.peek(1).text == "("
        ):
            callee = ts.next().text
            return self.parse_call(tuple(targets), callee)
        if len(targets) != 1:
            ts.error("multiple assignment targets require a method call")
        return LocalAssign(targets[0], self.parse_expr())

    def parse_call(self, targets: tuple, callee: str) -> MethodCall:
        self.ts.expect_sym("(")
        args: list[VExpr] = []
        while not self.ts.at_sym(")"):
            if args:
                self.ts.expect_sym(",")
            args.append(self.parse_expr())
        self.ts.expect_sym(")")
        return MethodCall(targets, callee, tuple(args))

    # ---------------------------------------------------------- assertions
    def parse_assertion(self) -> VAssert:
        e = self.parse_expr()
        return self.to_assertion(e)

    def to_assertion(self, e: VExpr) -> VAssert:
        match e:
            case _AccExpr(rcv, f, p):
                self._reject_acc(rcv)
                self._reject_acc(p)
                return Acc(rcv, f, p)
            case _Ternary(c, t, f):
                self._reject_acc(c)
                return CondAssert(c, self.to_assertion(t), self.to_assertion(f))
            case BinOp(l, "&&", r):
                return Sep(self.to_assertion(l), self.to_assertion(r))
            case BinOp(l, "==>", r):
                self._reject_acc(l)
                return Implies(l, self.to_assertion(r))
            case _:
                self._reject_acc(e)
                return Pure(e)

    def _reject_acc(self, e: VExpr) -> None:
        found = _find_acc(e)
        if found:
            self.ts.error("acc(...) is only allowed in assertion position")

    # --------------------------------------------------------- expressions
    def parse_expr(self) -> VExpr:
        return self.parse_ternary()

    def parse_ternary(self) -> VExpr:
        cond = self.parse_implies()
        if self.ts.at_sym("?"):
            self.ts.next()
            then_e = self.parse_ternary()
            self.ts.expect_sym(":")
            else_e = self.parse_ternary()
            return _Ternary(cond, then_e, else_e)
        return cond

    def parse_implies(self) -> VExpr:
        left = self.parse_or()
        if self.ts.at_sym("==>"):
            self.ts.next()
            return BinOp(left, "==>", self.parse_implies())
        return left

    def parse_or(self) -> VExpr:
        left = self.parse_and()
        while self.ts.at_sym("||"):
            self.ts.next()
            left = BinOp(left, "||", self.parse_and())
        return left

    def parse_and(self) -> VExpr:
        left = self.parse_cmp()
        while self.ts.at_sym("&&"):
            self.ts.next()
            left = BinOp(left, "&&", self.parse_cmp())
        return left

    def parse_cmp(self) -> VExpr:
        left = self.parse_add()
        if self.ts.at_sym("==", "!=", "<", "<=", ">", ">="):
            op = self.ts.next().text
            return BinOp(left, op, self.parse_add())
        return left

    def parse_add(self) -> VExpr:
        left = self.parse_mul()
        while self.ts.at_sym("+", "-"):
            op = self.ts.next().text
            left = BinOp(left, op, self.parse_mul())
        return left

    def parse_mul(self) -> VExpr:
        left = self.parse_unary()
        while self.ts.at_sym("*", "/", "%"):
            op = self.ts.next().text
            left = BinOp(left, op, self.parse_unary())
        return left

    def parse_unary(self) -> VExpr:
        if self.ts.at_sym("!"):
            self.ts.next()
            return UnOp("!", self.parse_unary())
        if self.ts.at_sym("-"):
            self.ts.next()
            return UnOp("-", self.parse_unary())
        return self.parse_postfix()

    def parse_postfix(self) -> VExpr:
        e = self.parse_primary()
        while self.ts.at_sym("."):
            self.ts.next()
            fld = self.ts.expect_ident().text
            e = FieldAcc(e, fld)
        return e

    def parse_primary(self) -> VExpr:
        ts = self.ts
        t = ts.peek()
        if t.kind == "INT":
            ts.next()
            return Lit(int(t.text))
        if ts.at_sym("("):
            ts.next()
            e = self.parse_expr()
            ts.expect_sym(")")
            return e
        if t.kind == "IDENT":
            if t.text == "true":
                ts.next()
                return Lit(True)
            if t.text == "false":
                ts.next()
                return Lit(False)
            if t.text == "null":
                ts.next()
                return Lit(NULL)
            if t.text == "write":
                ts.next()
                return Lit(Fraction(1))
            if t.text == "none":
                ts.next()
                return Lit(Fraction(0))
            if t.text == "acc":
                ts.next()
                ts.expect_sym("(")
                loc = self.parse_postfix()
                if not isinstance(loc, FieldAcc):
                    ts.error("acc(...) requires a field location")
                perm: VExpr = Lit(Fraction(1))
                if ts.at_sym(","):
                    ts.next()
                    perm = self.parse_expr()
                ts.expect_sym(")")
                return _AccExpr(loc.rcv, loc.field, perm)
            if t.text in KEYWORDS:
                ts.error(f"unexpected keyword {t.text!r}")
            ts.next()
            return Var(t.text)
        ts.error(f"unexpected token {t.text!r}")
        raise AssertionError  # unreachable


def _find_acc(e) -> bool:
    match e:
        case _AccExpr():
            return True
        case _Ternary(c, t, f):
            return _find_acc(c) or _find_acc(t) or _find_acc(f)
        case BinOp(l, _, r):
            return _find_acc(l) or _find_acc(r)
        case UnOp(_, x):
            return _find_acc(x)
        case FieldAcc(rcv, _):
            return _find_acc(rcv)
        case _:
            return False


def _conjoin(asserts: list[VAssert]) -> VAssert:
    if not asserts:
        return Pure(Lit(True))
    out = asserts[-1]
    for a in reversed(asserts[:-1]):
        out = Sep(a, out)
    return out


def parse_program(src: str) -> Program:
    """Parse (but do not typecheck) a Viper-subset program."""
    return ViperParser(src).parse_program()
