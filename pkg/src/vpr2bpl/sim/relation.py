"""State relations between Viper and Boogie configurations.

The judgement relates a pair of Viper states -- an *evaluation* state and a
*reduction* state, equal except during check-and-remove passes -- to one
Boogie variable assignment.  The core relation :class:`SR` pins every tracked
source variable, the heap and the mask (and, in paired form, the evaluation
mask/heap) to the corresponding Boogie variables; auxiliary variables may
carry extra value predicates.  Projection wrappers adapt the arity at the
boundaries of check-and-remove sub-proofs: :class:`SndProj` constrains only
the reduction state, :class:`FstProj` only the evaluation state.

Because every constrained Boogie variable is a *function* of the Viper pair,
the set of related assignments is a single canonical assignment extended
arbitrarily on untracked variables; untracked variables are observable only
through reads, which the oracle treats as errors.  :func:`encode_state`
produces that canonical assignment and :func:`project_state` restricts a full
assignment to the tracked variables for comparison.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Tuple, Union

from ..common import Bounds, FrozenMap, MalformedProgramError, PairBudget
from ..viper.ast import Method, Program, Ref, VAssert, VType, mentioned_fields
from ..viper.eval import VCtx, make_ctx
from ..viper.state import ViperState, make_locations, type_domain
from ..boogie.values import EMPTY_HEAP, EMPTY_MASK, FieldToken, MapVal
from ..translate.background import btype_of
from ..translate.hints import TranslationRecord

# A state pair (evaluation state, reduction state).  Outside check-and-remove
# passes the two components are the same state.
StatePair = Tuple[ViperState, ViperState]


@dataclass(frozen=True)
class ValueIs:
    """Auxiliary-variable predicate: the variable holds exactly this value."""

    value: object

    def holds(self, v) -> bool:
        return v == self.value


@dataclass(frozen=True)
class SR:
    """The core state relation.

    Tracked source variables, the heap and the mask agree with their Boogie
    counterparts named by ``rec``.  In unpaired form the evaluation state must
    equal the reduction state.  In paired form the two may differ in their
    masks; the evaluation mask is pinned to ``rec.m0`` when present and left
    unconstrained otherwise (store and heap always agree across the pair,
    since check-and-remove passes touch only the mask).
    """

    rec: TranslationRecord
    aux: FrozenMap = FrozenMap()  # Boogie variable -> ValueIs
    paired: bool = False


@dataclass(frozen=True)
class SndProj:
    """Pair relation constraining only the reduction state."""

    inner: SR


@dataclass(frozen=True)
class FstProj:
    """Pair relation constraining only the evaluation state."""

    inner: SR


RelationSpec = Union[SR, SndProj, FstProj]


# --------------------------------------------------------------------------
# Field encoding
# --------------------------------------------------------------------------

class FieldEnc:
    """Maps source field names to Boogie field tokens and back."""

    def __init__(self, rec: TranslationRecord, vctx: VCtx):
        self.tokens: Dict[str, FieldToken] = {
            f: FieldToken(rec.field[f], btype_of(t))
            for f, t in vctx.field_types
            if f in rec.field
        }

    def heap(self, heap: FrozenMap) -> MapVal:
        mv = EMPTY_HEAP
        for (ref, f), v in heap.items():
            mv = mv.upd(ref, self.tokens[f], v)
        return mv

    def mask(self, mask: FrozenMap) -> MapVal:
        mv = EMPTY_MASK
        for (ref, f), p in mask.items():
            mv = mv.upd(ref, self.tokens[f], Fraction(p))
        return mv


# --------------------------------------------------------------------------
# Canonical related assignment
# --------------------------------------------------------------------------

def tracked_names(spec: RelationSpec) -> Tuple[str, ...]:
    """The Boogie variables the relation constrains, in a fixed order."""
    if isinstance(spec, (SndProj, FstProj)):
        return tracked_names(spec.inner)
    rec = spec.rec
    names = [rec.var[x] for x in sorted(rec.var)]
    names += [rec.h, rec.m]
    if spec.paired:
        if rec.m0 is not None:
            names.append(rec.m0)
        if rec.h0 is not None:
            names.append(rec.h0)
    names += sorted(spec.aux)
    return tuple(names)


def encode_state(spec: RelationSpec, fenc: FieldEnc, tau: StatePair) -> FrozenMap:
    """The canonical Boogie assignment related to ``tau`` (tracked variables
    only).  Auxiliary predicates other than exact values cannot be inverted
    and are rejected."""
    ev, red = tau
    if isinstance(spec, SndProj):
        return encode_state(spec.inner, fenc, (red, red))
    if isinstance(spec, FstProj):
        return encode_state(spec.inner, fenc, (ev, ev))
    rec = spec.rec
    d: dict = {rec.var[x]: red.store[x] for x in rec.var}
    d[rec.h] = fenc.heap(red.heap)
    d[rec.m] = fenc.mask(red.mask)
    if spec.paired:
        if rec.m0 is not None:
            d[rec.m0] = fenc.mask(ev.mask)
        if rec.h0 is not None:
            d[rec.h0] = fenc.heap(ev.heap)
    for name, pred in spec.aux.items():
        if not isinstance(pred, ValueIs):
            raise MalformedProgramError(
                f"cannot invert auxiliary predicate for {name}"
            )
        d[name] = pred.value
    return FrozenMap(d)


def project_state(spec: RelationSpec, st: FrozenMap) -> Optional[FrozenMap]:
    """Restrict a full Boogie assignment to the relation's tracked variables;
    ``None`` when some tracked variable is unassigned."""
    d = {}
    for name in tracked_names(spec):
        try:
            d[name] = st[name]
        except KeyError:
            return None
    return FrozenMap(d)


def pair_constraints_ok(spec: RelationSpec, tau: StatePair) -> bool:
    """The Viper-side constraints of the relation: consistency of both
    states, and the pairing discipline on stores/heaps/equality."""
    ev, red = tau
    if not (ev.consistent() and red.consistent()):
        return False
    if isinstance(spec, (SndProj, FstProj)):
        return True
    if not spec.paired:
        return ev == red
    return ev.store == red.store and ev.heap == red.heap


def eval_relation(
    spec: RelationSpec, fenc: FieldEnc, tau: StatePair, st: FrozenMap
) -> bool:
    """Whether ``tau`` and the Boogie assignment ``st`` are related."""
    if not pair_constraints_ok(spec, tau):
        return False
    expected = encode_state(spec, fenc, tau)
    for name, v in expected.items():
        try:
            if st[name] != v:
                return False
        except KeyError:
            return False
    if isinstance(spec, (SndProj, FstProj)):
        inner = spec.inner
    else:
        inner = spec
    for name, pred in inner.aux.items():
        if name not in st or not pred.holds(st[name]):
            return False
    return True


# --------------------------------------------------------------------------
# Bounded enumeration
# --------------------------------------------------------------------------

class StateSpace:
    """Cached component domains for one method: stores over all declared
    variables, heaps over the observable location universe, and consistent
    masks.  Shared by every goal check of the method."""

    def __init__(self, program: Program, method: Method, bounds: Bounds):
        self.program = program
        self.method = method
        self.bounds = bounds
        self.vctx = make_ctx(program, method)
        self.fields = mentioned_fields(program, method)
        self.locs = make_locations(self.fields, bounds)
        self._stores: Optional[List[FrozenMap]] = None
        self._heaps: Optional[List[FrozenMap]] = None
        self._masks: Optional[List[FrozenMap]] = None

    @property
    def stores(self) -> List[FrozenMap]:
        if self._stores is None:
            names = [n for n, _ in self.vctx.var_types]
            domains = [type_domain(t, self.bounds) for _, t in self.vctx.var_types]
            self._stores = [
                FrozenMap(zip(names, vals))
                for vals in itertools.product(*domains)
            ]
        return self._stores

    @property
    def heaps(self) -> List[FrozenMap]:
        if self._heaps is None:
            ftypes = self.program.field_map()
            domains = [type_domain(ftypes[f], self.bounds) for (_, f) in self.locs]
            self._heaps = [
                FrozenMap(zip(self.locs, vals))
                for vals in itertools.product(*domains)
            ]
        return self._heaps

    @property
    def masks(self) -> List[FrozenMap]:
        if self._masks is None:
            perms = self.bounds.perms()
            self._masks = [
                FrozenMap(zip(self.locs, vals))
                for vals in itertools.product(*([perms] * len(self.locs)))
            ]
        return self._masks

    def zero_mask(self) -> FrozenMap:
        return FrozenMap({loc: Fraction(0) for loc in self.locs})


def enumerate_tau(
    spec: RelationSpec,
    space: StateSpace,
    budget: Optional[PairBudget] = None,
) -> Iterator[StatePair]:
    """All state pairs admitted by the relation's Viper-side constraints over
    the bounded domains.  Unpaired relations yield diagonal pairs; paired
    relations enumerate the two masks independently over a shared store and
    heap.  Projection wrappers enumerate like their inner relation in
    unpaired form (the unconstrained component mirrors the constrained one,
    which is sufficient for their only use as output relations)."""
    if isinstance(spec, (SndProj, FstProj)):
        spec = SR(spec.inner.rec, spec.inner.aux, paired=False)
    paired = isinstance(spec, SR) and spec.paired
    for store in space.stores:
        for heap in space.heaps:
            for mask in space.masks:
                red = ViperState(store, heap, mask)
                if not paired:
                    if budget is not None:
                        budget.charge()
                    yield (red, red)
                    continue
                for mask0 in space.masks:
                    if budget is not None:
                        budget.charge()
                    yield (ViperState(store, heap, mask0), red)
