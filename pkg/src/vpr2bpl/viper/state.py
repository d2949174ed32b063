"""Viper program states and outcomes.

A state is a store (variables to values), a total heap over the bounded
location universe, and a fractional permission mask over the same universe.
Locations are pairs of a non-null reference and a field name.  A state is
consistent when every mask entry lies in ``[0, 1]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Tuple, Union

from ..common import Bounds, FrozenMap, MalformedProgramError
from .ast import NULL, Ref, VType, VValue

Loc = Tuple[Ref, str]


def type_default(t: VType) -> VValue:
    if t is VType.INT:
        return 0
    if t is VType.BOOL:
        return False
    if t is VType.REF:
        return NULL
    return Fraction(0)


def type_domain(t: VType, bounds: Bounds) -> list[VValue]:
    if t is VType.INT:
        return list(bounds.ints())
    if t is VType.BOOL:
        return [False, True]
    if t is VType.REF:
        return [NULL] + [Ref(n) for n in bounds.ref_names()]
    return list(bounds.perms())


@dataclass(frozen=True)
class ViperState:
    store: FrozenMap  # var name -> VValue
    heap: FrozenMap   # Loc -> VValue (total over the location universe)
    mask: FrozenMap   # Loc -> Fraction (total over the location universe)

    def set_var(self, name: str, value: VValue) -> "ViperState":
        return ViperState(self.store.set(name, value), self.heap, self.mask)

    def set_var_many(self, names: Iterable[str], values: Iterable[VValue]) -> "ViperState":
        return ViperState(self.store.set_many(zip(names, values)), self.heap, self.mask)

    def set_heap(self, loc: Loc, value: VValue) -> "ViperState":
        if loc not in self.heap:
            raise MalformedProgramError(f"location outside universe: {loc}")
        return ViperState(self.store, self.heap.set(loc, value), self.mask)

    def set_mask(self, loc: Loc, perm: Fraction) -> "ViperState":
        if loc not in self.mask:
            raise MalformedProgramError(f"location outside universe: {loc}")
        return ViperState(self.store, self.heap, self.mask.set(loc, Fraction(perm)))

    def perm_at(self, loc: Loc) -> Fraction:
        ref, _ = loc
        if ref == NULL:
            return Fraction(0)
        return self.mask[loc]

    def consistent(self) -> bool:
        return all(Fraction(0) <= p <= Fraction(1) for p in self.mask.values())

    def locations(self) -> Iterable[Loc]:
        return self.mask.keys()


@dataclass(frozen=True)
class Normal:
    state: ViperState


@dataclass(frozen=True)
class Failure:
    pass


@dataclass(frozen=True)
class Magic:
    pass


FAILURE = Failure()
MAGIC = Magic()

VOutcome = Union[Normal, Failure, Magic]


def make_locations(fields: Iterable[str], bounds: Bounds) -> list[Loc]:
    return [(Ref(r), f) for r in bounds.ref_names() for f in fields]


def zero_mask(fields: Iterable[str], bounds: Bounds) -> FrozenMap:
    return FrozenMap({loc: Fraction(0) for loc in make_locations(fields, bounds)})


def default_heap(field_types: dict[str, VType], fields: Iterable[str], bounds: Bounds) -> FrozenMap:
    return FrozenMap(
        {loc: type_default(field_types[loc[1]]) for loc in make_locations(fields, bounds)}
    )


def mask_add(m1: FrozenMap, m2: FrozenMap) -> FrozenMap:
    if set(m1.keys()) != set(m2.keys()):
        raise MalformedProgramError("mask universes differ")
    return FrozenMap({loc: m1[loc] + m2[loc] for loc in m1})


def mask_sub(m1: FrozenMap, m2: FrozenMap) -> FrozenMap:
    if set(m1.keys()) != set(m2.keys()):
        raise MalformedProgramError("mask universes differ")
    return FrozenMap({loc: m1[loc] - m2[loc] for loc in m1})


def mask_leq(m1: FrozenMap, m2: FrozenMap) -> bool:
    if set(m1.keys()) != set(m2.keys()):
        raise MalformedProgramError("mask universes differ")
    return all(m1[loc] <= m2[loc] for loc in m1)


def state_add(s1: ViperState, s2: ViperState) -> ViperState:
    """Combine two states sharing a store and heap by adding their masks."""
    if s1.store != s2.store or s1.heap != s2.heap:
        raise MalformedProgramError("state addition requires matching store and heap")
    return ViperState(s1.store, s1.heap, mask_add(s1.mask, s2.mask))


def state_sub(s1: ViperState, s2: ViperState) -> ViperState:
    if s1.store != s2.store or s1.heap != s2.heap:
        raise MalformedProgramError("state subtraction requires matching store and heap")
    return ViperState(s1.store, s1.heap, mask_sub(s1.mask, s2.mask))


def state_leq(s1: ViperState, s2: ViperState) -> bool:
    """Pointwise mask order between states sharing a store and heap."""
    if s1.store != s2.store or s1.heap != s2.heap:
        return False
    return mask_leq(s1.mask, s2.mask)
