"""Viper-subset front end: AST, parser, printer, big-step semantics."""

from .ast import (  # noqa: F401
    Acc, BinOp, CondAssert, Exhale, FieldAcc, FieldAssign, FieldDecl, If,
    Implies, Inhale, Lit, LocalAssign, Method, MethodCall, NULL, Program,
    Pure, Ref, Sep, Seq, Skip, UnOp, Var, VarDecl, VAssert, VAssertStmt,
    VExpr, VStmt, VType, seq_of,
)
from .parser import parse_program  # noqa: F401
from .printer import print_assert, print_expr, print_program  # noqa: F401
from .typecheck import check_program, load_program  # noqa: F401
