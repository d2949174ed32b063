"""Boogie-subset back end: AST, printer/parser, small-step semantics."""

from .ast import (  # noqa: F401
    BAssert, BAssign, BAssume, BCall, BExists, BForall, BHavoc, BLit, BBin,
    BProc, BProgram, BTypeForall, BUn, BVar, Block, BlockIf, BStmt, BType,
    FuncDecl, INT, BOOL, REAL, TCon, TVar, BREF, HTYPE, MTYPE,
)
