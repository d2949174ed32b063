"""AST for the generated Boogie subset.

Types are built-in ``int``/``bool``/``real`` plus applications of declared
type constructors; functions may be polymorphic in type variables, and all
polymorphic-map operations appear as explicit ``read``/``upd`` function calls.
Procedure bodies are lists of blocks; a block is a run of simple commands
(``assume``/``assert``/assignment/``havoc``) optionally terminated by a
conditional or nondeterministic branch over nested block lists.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Tuple, Union


# --------------------------------------------------------------------------
# Types
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class TCon:
    name: str
    args: Tuple["BType", ...] = ()


@dataclass(frozen=True)
class TVar:
    name: str


@dataclass(frozen=True)
class _Builtin:
    name: str


INT = _Builtin("int")
BOOL = _Builtin("bool")
REAL = _Builtin("real")

BType = Union[_Builtin, TCon, TVar]

BREF = TCon("bref")
HTYPE = TCon("HType")
MTYPE = TCon("MType")


def subst_type(t: BType, tenv: dict[str, BType]) -> BType:
    match t:
        case TVar(n):
            return tenv.get(n, t)
        case TCon(n, args):
            return TCon(n, tuple(subst_type(a, tenv) for a in args))
        case _:
            return t


# --------------------------------------------------------------------------
# Expressions
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class BVar:
    name: str


@dataclass(frozen=True)
class BLit:
    value: Union[int, bool, Fraction]


@dataclass(frozen=True)
class BBin:
    left: "BExpr"
    op: str
    right: "BExpr"


@dataclass(frozen=True)
class BUn:
    op: str
    operand: "BExpr"


@dataclass(frozen=True)
class BCall:
    func: str
    type_args: Tuple[BType, ...]
    args: Tuple["BExpr", ...]


@dataclass(frozen=True)
class BForall:
    binders: Tuple[Tuple[str, BType], ...]
    tvars: Tuple[str, ...]
    body: "BExpr"


@dataclass(frozen=True)
class BExists:
    binders: Tuple[Tuple[str, BType], ...]
    tvars: Tuple[str, ...]
    body: "BExpr"


@dataclass(frozen=True)
class BTypeForall:
    """Kept distinct from value quantification for clarity in axioms that
    quantify only over types."""

    tvars: Tuple[str, ...]
    body: "BExpr"


BExpr = Union[BVar, BLit, BBin, BUn, BCall, BForall, BExists, BTypeForall]


# --------------------------------------------------------------------------
# Commands and blocks
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class BAssume:
    expr: BExpr


@dataclass(frozen=True)
class BAssert:
    expr: BExpr


@dataclass(frozen=True)
class BAssign:
    var: str
    expr: BExpr


@dataclass(frozen=True)
class BHavoc:
    var: str


BSimpleCmd = Union[BAssume, BAssert, BAssign, BHavoc]


@dataclass(frozen=True)
class BlockIf:
    """Branch terminating a block: conditional when ``cond`` is set, otherwise
    a nondeterministic choice between the two branch statements."""

    cond: Optional[BExpr]
    then_s: "BStmt"
    else_s: "BStmt"


@dataclass(frozen=True)
class Block:
    cmds: Tuple[BSimpleCmd, ...]
    branch: Optional[BlockIf] = None


BStmt = Tuple[Block, ...]  # a statement is a list of blocks


# --------------------------------------------------------------------------
# Declarations
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class FuncDecl:
    name: str
    tvars: Tuple[str, ...]
    params: Tuple[Tuple[str, BType], ...]
    ret: BType


@dataclass(frozen=True)
class BProc:
    name: str
    params: Tuple[Tuple[str, BType], ...]
    locals_: Tuple[Tuple[str, BType], ...]
    body: BStmt

    def var_type(self, name: str) -> Optional[BType]:
        for n, t in self.params + self.locals_:
            if n == name:
                return t
        return None


@dataclass(frozen=True)
class BProgram:
    type_decls: Tuple[Tuple[str, int], ...]  # (constructor name, arity)
    consts: Tuple[Tuple[str, BType], ...]
    funcs: Tuple[FuncDecl, ...]
    axioms: Tuple[BExpr, ...]
    globals_: Tuple[Tuple[str, BType], ...]
    procs: Tuple[BProc, ...]

    def proc(self, name: str) -> BProc:
        for p in self.procs:
            if p.name == name:
                return p
        raise KeyError(name)

    def func(self, name: str) -> FuncDecl:
        for f in self.funcs:
            if f.name == name:
                return f
        raise KeyError(name)
