"""Background Boogie declarations shared by every translated program.

The Viper heap and permission mask become two global map-typed variables
``H`` and ``M``; fields become typed constants; all map access is desugared
into ``readHeap``/``updHeap``/``readMask``/``updMask`` function calls.  The
axioms characterise read-over-update (same and distinct key, for both map
types), the empty mask, the bound enforced by ``GoodMask`` and the agreement
property of ``idOnPositive``.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Tuple

from ..common import MalformedProgramError
from ..viper.ast import FieldDecl, VType
from ..boogie.ast import (
    BBin, BCall, BForall, BLit, BOOL, BREF, BType, BVar, FuncDecl, HTYPE,
    INT, MTYPE, REAL, TCon, TVar,
)

FIELD_PREFIX = "f_"

HEAP_VAR = "H"
MASK_VAR = "M"


def btype_of(t: VType) -> BType:
    return {
        VType.INT: INT,
        VType.BOOL: BOOL,
        VType.REF: BREF,
        VType.PERM: REAL,
    }[t]


def field_const(name: str) -> str:
    return FIELD_PREFIX + name


def _bfield(t: BType) -> TCon:
    return TCon("bfield", (t,))


_T = TVar("T")
_U = TVar("U")


def _funcs() -> Tuple[FuncDecl, ...]:
    return (
        FuncDecl("readHeap", ("T",),
                 (("h", HTYPE), ("r", BREF), ("f", _bfield(_T))), _T),
        FuncDecl("updHeap", ("T",),
                 (("h", HTYPE), ("r", BREF), ("f", _bfield(_T)), ("v", _T)),
                 HTYPE),
        FuncDecl("readMask", ("T",),
                 (("m", MTYPE), ("r", BREF), ("f", _bfield(_T))), REAL),
        FuncDecl("updMask", ("T",),
                 (("m", MTYPE), ("r", BREF), ("f", _bfield(_T)), ("p", REAL)),
                 MTYPE),
        FuncDecl("GoodMask", (), (("m", MTYPE),), BOOL),
        FuncDecl("idOnPositive", (),
                 (("h1", HTYPE), ("h2", HTYPE), ("m", MTYPE)), BOOL),
    )


def _read_heap(h, r, f, targ):
    return BCall("readHeap", (targ,), (h, r, f))


def _read_mask(m, r, f, targ):
    return BCall("readMask", (targ,), (m, r, f))


def _axioms() -> tuple:
    h, r, r2, f, g, v = (BVar(n) for n in ("h", "r", "r2", "f", "g", "v"))
    m, p, h1, h2 = (BVar(n) for n in ("m", "p", "h1", "h2"))
    zero = BLit(Fraction(0))
    one = BLit(Fraction(1))

    heap_same = BForall(
        (("h", HTYPE), ("r", BREF), ("f", _bfield(_T)), ("v", _T)), ("T",),
        BBin(
            _read_heap(BCall("updHeap", (_T,), (h, r, f, v)), r, f, _T),
            "==", v,
        ),
    )
    heap_distinct = BForall(
        (("h", HTYPE), ("r", BREF), ("r2", BREF),
         ("f", _bfield(_T)), ("g", _bfield(_U)), ("v", _T)), ("T", "U"),
        BBin(
            BBin(BBin(r, "!=", r2), "||", BBin(f, "!=", g)),
            "==>",
            BBin(
                _read_heap(BCall("updHeap", (_T,), (h, r, f, v)), r2, g, _U),
                "==", _read_heap(h, r2, g, _U),
            ),
        ),
    )
    mask_same = BForall(
        (("m", MTYPE), ("r", BREF), ("f", _bfield(_T)), ("p", REAL)), ("T",),
        BBin(
            _read_mask(BCall("updMask", (_T,), (m, r, f, p)), r, f, _T),
            "==", p,
        ),
    )
    mask_distinct = BForall(
        (("m", MTYPE), ("r", BREF), ("r2", BREF),
         ("f", _bfield(_T)), ("g", _bfield(_U)), ("p", REAL)), ("T", "U"),
        BBin(
            BBin(BBin(r, "!=", r2), "||", BBin(f, "!=", g)),
            "==>",
            BBin(
                _read_mask(BCall("updMask", (_T,), (m, r, f, p)), r2, g, _U),
                "==", _read_mask(m, r2, g, _U),
            ),
        ),
    )
    zero_mask = BForall(
        (("r", BREF), ("f", _bfield(_T))), ("T",),
        BBin(_read_mask(BVar("ZeroMask"), r, f, _T), "==", zero),
    )
    good_mask = BForall(
        (("m", MTYPE), ("r", BREF), ("f", _bfield(_T))), ("T",),
        BBin(
            BCall("GoodMask", (), (m,)),
            "==>",
            BBin(
                BBin(_read_mask(m, r, f, _T), ">=", zero),
                "&&",
                BBin(_read_mask(m, r, f, _T), "<=", one),
            ),
        ),
    )
    id_on_positive = BForall(
        (("h1", HTYPE), ("h2", HTYPE), ("m", MTYPE)), (),
        BBin(
            BCall("idOnPositive", (), (h1, h2, m)),
            "==>",
            BForall(
                (("r", BREF), ("f", _bfield(_T))), ("T",),
                BBin(
                    BBin(_read_mask(m, r, f, _T), ">", zero),
                    "==>",
                    BBin(_read_heap(h1, r, f, _T), "==",
                         _read_heap(h2, r, f, _T)),
                ),
            ),
        ),
    )
    return (heap_same, heap_distinct, mask_same, mask_distinct, zero_mask,
            good_mask, id_on_positive)


def background_decls(fields: Tuple[FieldDecl, ...]):
    """Declarations every translated program starts with: the four type
    constructors, the null/zero-mask/field constants, the six background
    functions with their axioms, and the heap/mask globals.

    Returns ``(type_decls, consts, funcs, axioms, globals_)`` ready to embed
    in a :class:`~vpr2bpl.boogie.ast.BProgram`."""
    names = [f.name for f in fields]
    if len(set(names)) != len(names):
        raise MalformedProgramError("duplicate field names")
    type_decls = (("bref", 0), ("bfield", 1), ("HType", 0), ("MType", 0))
    consts = (("null", BREF), ("ZeroMask", MTYPE)) + tuple(
        (field_const(f.name), _bfield(btype_of(f.vtype))) for f in fields
    )
    globals_ = ((HEAP_VAR, HTYPE), (MASK_VAR, MTYPE))
    return type_decls, consts, _funcs(), _axioms(), globals_
