"""Semantic values for the Boogie subset under the canonical interpretation.

References reuse the Viper-side ``Ref`` values.  Field constants denote
:class:`FieldToken` values tagged with their value type.  The map types
``HType`` and ``MType`` denote finite partial maps from (reference, field
token) pairs to values with a per-type default; maps are kept canonical by
omitting entries equal to the default, so structural equality coincides with
semantic equality.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Tuple, Union

from ..common import FrozenMap, MalformedProgramError
from ..viper.ast import NULL, Ref
from .ast import BOOL, BREF, BType, HTYPE, INT, MTYPE, REAL, TCon


@dataclass(frozen=True)
class FieldToken:
    name: str
    vtype: BType  # the field's value type


@dataclass(frozen=True)
class MapVal:
    kind: str  # "heap" | "mask"
    entries: FrozenMap  # (Ref, FieldToken) -> BValue, defaults omitted

    def read(self, ref: Ref, fld: FieldToken):
        try:
            return self.entries[(ref, fld)]
        except KeyError:
            return Fraction(0) if self.kind == "mask" else default_value(fld.vtype)

    def upd(self, ref: Ref, fld: FieldToken, value) -> "MapVal":
        default = Fraction(0) if self.kind == "mask" else default_value(fld.vtype)
        if value == default and type(value) is type(default):
            if (ref, fld) in self.entries:
                return MapVal(self.kind, self.entries.remove((ref, fld)))
            return self
        return MapVal(self.kind, self.entries.set((ref, fld), value))


BValue = Union[int, bool, Fraction, Ref, FieldToken, MapVal]

EMPTY_HEAP = MapVal("heap", FrozenMap())
EMPTY_MASK = MapVal("mask", FrozenMap())


def default_value(t: BType) -> BValue:
    if t is INT:
        return 0
    if t is BOOL:
        return False
    if t is REAL:
        return Fraction(0)
    if t == BREF:
        return NULL
    if t == HTYPE:
        return EMPTY_HEAP
    if t == MTYPE:
        return EMPTY_MASK
    raise MalformedProgramError(f"no default value for type {t}")
