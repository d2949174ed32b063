"""Structural reader for the Boogie subset emitted by the translator.

Parses the printed surface syntax back into the AST: declarations, axioms and
procedures.  Two normalisations invert the printer exactly: real-literal
divisions and negated literals fold into single rational/integer literals, and
type arguments of polymorphic function calls are reconstructed by unifying
argument types against the declared signature.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Optional

from ..common import MalformedProgramError, ParseError
from ..lexer import TokenStream, tokenize
from .ast import (
    BAssert, BAssign, BAssume, BBin, BCall, BExists, BExpr, BForall, BHavoc,
    BLit, BOOL, BProc, BProgram, BStmt, BType, BTypeForall, BUn, BVar, Block,
    BlockIf, FuncDecl, INT, REAL, TCon, TVar, subst_type,
)

SYMBOLS = [
    "==>", "==", "!=", "<=", ">=", "&&", "||", ":=", "::",
    "(", ")", "{", "}", ",", ":", ";", "<", ">",
    "+", "-", "*", "/", "%", "!",
]

KEYWORDS = {
    "type", "const", "function", "returns", "axiom", "var", "procedure",
    "assume", "assert", "havoc", "if", "else", "forall", "exists",
    "true", "false", "int", "bool", "real",
}

_BUILTINS = {"int": INT, "bool": BOOL, "real": REAL}


class BoogieParser:
    def __init__(self, src: str):
        self.ts = TokenStream(tokenize(src, SYMBOLS))
        self.funcs: dict[str, FuncDecl] = {}
        self.consts: dict[str, BType] = {}
        self.globals: dict[str, BType] = {}
        self.type_decls: dict[str, int] = {}

    # ------------------------------------------------------------ program
    def parse_program(self) -> BProgram:
        types, consts, funcs, axioms, globals_, procs = [], [], [], [], [], []
        while self.ts.peek().kind != "EOF":
            if self.ts.at_kw("type"):
                self.ts.next()
                name = self.ts.expect_ident().text
                arity = 0
                while self.ts.peek().kind == "IDENT":
                    self.ts.next()
                    arity += 1
                self.ts.expect_sym(";")
                types.append((name, arity))
                self.type_decls[name] = arity
            elif self.ts.at_kw("const"):
                self.ts.next()
                name = self.ts.expect_ident().text
                self.ts.expect_sym(":")
                t = self.parse_type()
                self.ts.expect_sym(";")
                consts.append((name, t))
                self.consts[name] = t
            elif self.ts.at_kw("function"):
                funcs.append(self.parse_func())
            elif self.ts.at_kw("axiom"):
                self.ts.next()
                axioms.append(self.parse_expr({}))
                self.ts.expect_sym(";")
            elif self.ts.at_kw("var"):
                self.ts.next()
                name = self.ts.expect_ident().text
                self.ts.expect_sym(":")
                t = self.parse_type()
                self.ts.expect_sym(";")
                globals_.append((name, t))
                self.globals[name] = t
            elif self.ts.at_kw("procedure"):
                procs.append(self.parse_proc())
            else:
                self.ts.error("expected a declaration")
        return BProgram(
            tuple(types), tuple(consts), tuple(funcs), tuple(axioms),
            tuple(globals_), tuple(procs),
        )

    def parse_func(self) -> FuncDecl:
        self.ts.expect_kw("function")
        name = self.ts.expect_ident().text
        tvars: list[str] = []
        if self.ts.at_sym("<"):
            self.ts.next()
            while not self.ts.at_sym(">"):
                if tvars:
                    self.ts.expect_sym(",")
                tvars.append(self.ts.expect_ident().text)
            self.ts.expect_sym(">")
        params = self.parse_binders(set(tvars))
        self.ts.expect_kw("returns")
        self.ts.expect_sym("(")
        ret = self.parse_type(set(tvars))
        self.ts.expect_sym(")")
        self.ts.expect_sym(";")
        decl = FuncDecl(name, tuple(tvars), params, ret)
        self.funcs[name] = decl
        return decl

    def parse_binders(self, tvars: set[str] = frozenset()) -> tuple:
        self.ts.expect_sym("(")
        out = []
        while not self.ts.at_sym(")"):
            if out:
                self.ts.expect_sym(",")
            n = self.ts.expect_ident().text
            self.ts.expect_sym(":")
            out.append((n, self.parse_type(tvars)))
        self.ts.expect_sym(")")
        return tuple(out)

    # -------------------------------------------------------------- types
    def parse_type(self, tvars: set[str] = frozenset()) -> BType:
        t = self.parse_type_atom(tvars)
        if isinstance(t, TCon) and self.type_decls.get(t.name, 0) > 0 and not t.args:
            args = []
            for _ in range(self.type_decls[t.name]):
                args.append(self.parse_type_atom(tvars))
            return TCon(t.name, tuple(args))
        return t

    def parse_type_atom(self, tvars: set[str]) -> BType:
        if self.ts.at_sym("("):
            self.ts.next()
            t = self.parse_type(tvars)
            self.ts.expect_sym(")")
            return t
        tok = self.ts.expect_ident()
        if tok.text in _BUILTINS:
            return _BUILTINS[tok.text]
        if tok.text in tvars:
            return TVar(tok.text)
        return TCon(tok.text)

    # --------------------------------------------------------- procedures
    def parse_proc(self) -> BProc:
        self.ts.expect_kw("procedure")
        name = self.ts.expect_ident().text
        params = self.parse_binders()
        self.ts.expect_sym("{")
        locals_: list = []
        while self.ts.at_kw("var"):
            self.ts.next()
            n = self.ts.expect_ident().text
            self.ts.expect_sym(":")
            t = self.parse_type()
            self.ts.expect_sym(";")
            locals_.append((n, t))
        env = dict(self.globals)
        env.update(params)
        env.update(locals_)
        body = self.parse_stmt_list(env)
        self.ts.expect_sym("}")
        return BProc(name, tuple(params), tuple(locals_), body)

    def parse_stmt_list(self, env: dict[str, BType]) -> BStmt:
        blocks: list[Block] = []
        cmds: list = []
        while not self.ts.at_sym("}"):
            if self.ts.at_kw("assume"):
                self.ts.next()
                cmds.append(BAssume(self.parse_expr(env)))
                self.ts.expect_sym(";")
            elif self.ts.at_kw("assert"):
                self.ts.next()
                cmds.append(BAssert(self.parse_expr(env)))
                self.ts.expect_sym(";")
            elif self.ts.at_kw("havoc"):
                self.ts.next()
                cmds.append(BHavoc(self.ts.expect_ident().text))
                self.ts.expect_sym(";")
            elif self.ts.at_kw("if"):
                self.ts.next()
                self.ts.expect_sym("(")
                cond: Optional[BExpr]
                if self.ts.at_sym("*"):
                    self.ts.next()
                    cond = None
                else:
                    cond = self.parse_expr(env)
                self.ts.expect_sym(")")
                self.ts.expect_sym("{")
                then_s = self.parse_stmt_list(env)
                self.ts.expect_sym("}")
                else_s: BStmt = ()
                if self.ts.at_kw("else"):
                    self.ts.next()
                    self.ts.expect_sym("{")
                    else_s = self.parse_stmt_list(env)
                    self.ts.expect_sym("}")
                blocks.append(Block(tuple(cmds), BlockIf(cond, then_s, else_s)))
                cmds = []
            else:
                name = self.ts.expect_ident()
                if name.text in KEYWORDS:
                    self.ts.error(f"unexpected keyword {name.text!r}")
                self.ts.expect_sym(":=")
                cmds.append(BAssign(name.text, self.parse_expr(env)))
                self.ts.expect_sym(";")
        if cmds:
            blocks.append(Block(tuple(cmds), None))
        return tuple(blocks)

    # -------------------------------------------------------- expressions
    def parse_expr(self, env: dict[str, BType]) -> BExpr:
        return self.parse_implies(env)

    def parse_implies(self, env) -> BExpr:
        left = self.parse_or(env)
        if self.ts.at_sym("==>"):
            self.ts.next()
            return BBin(left, "==>", self.parse_implies(env))
        return left

    def parse_or(self, env) -> BExpr:
        left = self.parse_and(env)
        while self.ts.at_sym("||"):
            self.ts.next()
            left = BBin(left, "||", self.parse_and(env))
        return left

    def parse_and(self, env) -> BExpr:
        left = self.parse_cmp(env)
        while self.ts.at_sym("&&"):
            self.ts.next()
            left = BBin(left, "&&", self.parse_cmp(env))
        return left

    def parse_cmp(self, env) -> BExpr:
        left = self.parse_add(env)
        if self.ts.at_sym("==", "!=", "<", "<=", ">", ">="):
            op = self.ts.next().text
            return BBin(left, op, self.parse_add(env))
        return left

    def parse_add(self, env) -> BExpr:
        left = self.parse_mul(env)
        while self.ts.at_sym("+", "-"):
            op = self.ts.next().text
            left = BBin(left, op, self.parse_mul(env))
        return left

    def parse_mul(self, env) -> BExpr:
        left = self.parse_unary(env)
        while self.ts.at_sym("*", "/", "%"):
            op = self.ts.next().text
            right = self.parse_unary(env)
            if (
                op == "/"
                and isinstance(left, BLit)
                and isinstance(left.value, Fraction)
                and isinstance(right, BLit)
                and isinstance(right.value, Fraction)
                and right.value != 0
            ):
                left = BLit(left.value / right.value)
            else:
                left = BBin(left, op, right)
        return left

    def parse_unary(self, env) -> BExpr:
        if self.ts.at_sym("!"):
            self.ts.next()
            return BUn("!", self.parse_unary(env))
        if self.ts.at_sym("-"):
            self.ts.next()
            inner = self.parse_unary(env)
            if isinstance(inner, BLit) and not isinstance(inner.value, bool):
                return BLit(-inner.value)
            return BUn("-", inner)
        return self.parse_primary(env)

    def parse_primary(self, env) -> BExpr:
        ts = self.ts
        t = ts.peek()
        if t.kind == "INT":
            ts.next()
            return BLit(int(t.text))
        if t.kind == "REAL":
            ts.next()
            return BLit(Fraction(t.text))
        if ts.at_sym("("):
            ts.next()
            if ts.at_kw("forall", "exists"):
                e = self.parse_quant(env)
            else:
                e = self.parse_expr(env)
            ts.expect_sym(")")
            return e
        if t.kind == "IDENT":
            if t.text == "true":
                ts.next()
                return BLit(True)
            if t.text == "false":
                ts.next()
                return BLit(False)
            if t.text in KEYWORDS:
                ts.error(f"unexpected keyword {t.text!r}")
            ts.next()
            if ts.at_sym("("):
                return self.parse_call(t.text, env)
            return BVar(t.text)
        ts.error(f"unexpected token {t.text!r}")
        raise AssertionError

    def parse_quant(self, env) -> BExpr:
        kw = self.ts.next().text
        tvars: list[str] = []
        if self.ts.at_sym("<"):
            self.ts.next()
            while not self.ts.at_sym(">"):
                if tvars:
                    self.ts.expect_sym(",")
                tvars.append(self.ts.expect_ident().text)
            self.ts.expect_sym(">")
        binders: list = []
        while not self.ts.at_sym("::"):
            if binders:
                self.ts.expect_sym(",")
            n = self.ts.expect_ident().text
            self.ts.expect_sym(":")
            binders.append((n, self.parse_type(set(tvars))))
        self.ts.expect_sym("::")
        env2 = dict(env)
        env2.update(binders)
        body = self.parse_expr(env2)
        if kw == "exists":
            return BExists(tuple(binders), tuple(tvars), body)
        if not binders and tvars:
            return BTypeForall(tuple(tvars), body)
        return BForall(tuple(binders), tuple(tvars), body)

    def parse_call(self, fn: str, env) -> BExpr:
        self.ts.expect_sym("(")
        args: list[BExpr] = []
        while not self.ts.at_sym(")"):
            if args:
                self.ts.expect_sym(",")
            args.append(self.parse_expr(env))
        self.ts.expect_sym(")")
        if fn not in self.funcs:
            self.ts.error(f"unknown function {fn!r}")
        decl = self.funcs[fn]
        if len(args) != len(decl.params):
            self.ts.error(f"wrong argument count for {fn}")
        binding: dict[str, BType] = {}
        for (_, pt), arg in zip(decl.params, args):
            at = self.type_of(arg, env)
            if at is not None:
                _unify(pt, at, binding, self.ts)
        try:
            targs = tuple(binding[tv] for tv in decl.tvars)
        except KeyError:
            self.ts.error(f"cannot infer type arguments for {fn}")
        return BCall(fn, targs, tuple(args))

    def type_of(self, e: BExpr, env) -> Optional[BType]:
        match e:
            case BVar(n):
                if n in env:
                    return env[n]
                if n in self.consts:
                    return self.consts[n]
                self.ts.error(f"unknown variable {n!r}")
            case BLit(v):
                if isinstance(v, bool):
                    return BOOL
                if isinstance(v, Fraction):
                    return REAL
                return INT
            case BBin(l, op, _):
                if op in ("+", "-", "*", "/", "%"):
                    return self.type_of(l, env)
                return BOOL
            case BUn(op, x):
                return BOOL if op == "!" else self.type_of(x, env)
            case BCall(fn, targs, _):
                decl = self.funcs[fn]
                return subst_type(decl.ret, dict(zip(decl.tvars, targs)))
            case BForall() | BExists() | BTypeForall():
                return BOOL
        return None


def _unify(pt: BType, at: BType, binding: dict[str, BType], ts) -> None:
    match pt:
        case TVar(n):
            if n in binding:
                if binding[n] != at:
                    ts.error(f"conflicting type argument for {n}")
            else:
                binding[n] = at
        case TCon(name, args):
            if not (isinstance(at, TCon) and at.name == name and len(at.args) == len(args)):
                ts.error(f"type mismatch: expected {name}")
            for p, a in zip(args, at.args):
                _unify(p, a, binding, ts)
        case _:
            if pt != at:
                ts.error(f"type mismatch: {pt} vs {at}")


def parse_bprogram(src: str) -> BProgram:
    return BoogieParser(src).parse_program()
