"""Canonical interpretation and total expression evaluation.

The canonical interpretation fixes the meaning of the background theory over
the bounded universe: ``bref`` denotes null plus the bounded references,
``bfield T`` denotes the declared field constants of value type ``T``,
``HType``/``MType`` denote canonical finite maps, and the six background
functions (``readHeap``/``updHeap``/``readMask``/``updMask``/``GoodMask``/
``idOnPositive``) receive their intended meaning.  Correctness of generated
procedures is judged at this interpretation only.

Expression evaluation is total: division by zero yields zero, and value/type
quantifiers enumerate the bounded carriers (type quantifiers range over the
possible field value types, the only polymorphic positions the generated
programs use).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Tuple

from ..arith import DivisionByZero, apply_binop, apply_unop
from ..common import Bounds, FrozenMap, MalformedProgramError
from ..viper.ast import NULL, Ref
from .ast import (
    BBin, BCall, BExists, BExpr, BForall, BLit, BOOL, BProgram, BREF, BType,
    BTypeForall, BUn, BVar, HTYPE, INT, MTYPE, REAL, TCon, TVar, subst_type,
)
from .values import BValue, EMPTY_HEAP, EMPTY_MASK, FieldToken, MapVal, default_value


class UnassignedVar(Exception):
    def __init__(self, name: str):
        super().__init__(name)
        self.name = name


@dataclass
class BCtx:
    program: BProgram
    bounds: Bounds
    field_tokens: Tuple[FieldToken, ...]
    constants: Dict[str, BValue]
    _carriers: Dict[BType, List[BValue]] = field(default_factory=dict)

    def carrier(self, t: BType) -> List[BValue]:
        if t in self._carriers:
            return self._carriers[t]
        out = self._build_carrier(t)
        self._carriers[t] = out
        return out

    def _build_carrier(self, t: BType) -> List[BValue]:
        b = self.bounds
        if t is INT:
            return list(b.ints())
        if t is BOOL:
            return [False, True]
        if t is REAL:
            return list(b.perms())
        if t == BREF:
            return [NULL] + [Ref(n) for n in b.ref_names()]
        if isinstance(t, TCon) and t.name == "bfield":
            return [tok for tok in self.field_tokens if tok.vtype == t.args[0]]
        if t == HTYPE:
            return self._map_carrier("heap")
        if t == MTYPE:
            return self._map_carrier("mask")
        raise MalformedProgramError(f"no carrier for type {t}")

    def _map_carrier(self, kind: str) -> List[BValue]:
        locs = [
            (Ref(r), tok)
            for r in self.bounds.ref_names()
            for tok in self.field_tokens
        ]
        domains = [
            self.bounds.perms() if kind == "mask" else self.carrier(tok.vtype)
            for (_, tok) in locs
        ]
        out: List[BValue] = []
        empty = EMPTY_MASK if kind == "mask" else EMPTY_HEAP
        for values in itertools.product(*domains):
            mv = empty
            for loc, v in zip(locs, values):
                mv = mv.upd(loc[0], loc[1], v)
            out.append(mv)
        # Dedup: canonical form makes distinct tuples collapse only when they
        # differ in default-valued entries, which cannot happen here.
        return out

    def type_domain(self) -> List[BType]:
        """Domain of type quantifiers: the possible field value types."""
        return [INT, BOOL, REAL, BREF]


def canonical_interpretation(program: BProgram, bounds: Bounds) -> BCtx:
    tokens = []
    constants: Dict[str, BValue] = {}
    for name, t in program.consts:
        if isinstance(t, TCon) and t.name == "bfield":
            tok = FieldToken(name, t.args[0])
            tokens.append(tok)
            constants[name] = tok
        elif t == BREF and name == "null":
            constants[name] = NULL
        elif t == MTYPE and name == "ZeroMask":
            constants[name] = EMPTY_MASK
        else:
            raise MalformedProgramError(f"unsupported constant {name}: {t}")
    return BCtx(program, bounds, tuple(tokens), constants)


def _check_map(v: BValue, kind: str) -> MapVal:
    if not isinstance(v, MapVal) or v.kind != kind:
        raise MalformedProgramError(f"expected a {kind} map, found {v!r}")
    return v


def _apply_func(ctx: BCtx, name: str, args: List[BValue]) -> BValue:
    if name == "readHeap":
        h, r, f = args
        return _check_map(h, "heap").read(r, f)
    if name == "updHeap":
        h, r, f, v = args
        return _check_map(h, "heap").upd(r, f, v)
    if name == "readMask":
        m, r, f = args
        return _check_map(m, "mask").read(r, f)
    if name == "updMask":
        m, r, f, v = args
        return _check_map(m, "mask").upd(r, f, Fraction(v))
    if name == "GoodMask":
        (m,) = args
        return all(
            Fraction(0) <= p <= Fraction(1)
            for p in _check_map(m, "mask").entries.values()
        )
    if name == "idOnPositive":
        h1, h2, m = args
        h1 = _check_map(h1, "heap")
        h2 = _check_map(h2, "heap")
        m = _check_map(m, "mask")
        return all(
            h1.read(r, f) == h2.read(r, f)
            for (r, f), p in m.entries.items()
            if p > 0
        )
    raise MalformedProgramError(f"unknown function {name}")


def eval_bexpr(
    ctx: BCtx,
    state: FrozenMap,
    e: BExpr,
    env: dict | None = None,
) -> BValue:
    """Total evaluation.  ``state`` maps program variables to values;
    ``env`` holds quantifier-bound values and type-variable instantiations.
    Reading a variable absent from both raises :class:`UnassignedVar`."""
    env = env or {}
    return _eval(ctx, state, e, env, {})


def _eval(ctx: BCtx, state, e: BExpr, env: dict, tenv: dict) -> BValue:
    match e:
        case BVar(name):
            if name in env:
                return env[name]
            if name in ctx.constants:
                return ctx.constants[name]
            try:
                return state[name]
            except KeyError:
                raise UnassignedVar(name) from None
        case BLit(v):
            return v
        case BBin(l, op, r):
            lv = _eval(ctx, state, l, env, tenv)
            if op == "&&" and lv is False:
                return False
            if op == "||" and lv is True:
                return True
            if op == "==>" and lv is False:
                return True
            rv = _eval(ctx, state, r, env, tenv)
            try:
                return apply_binop(op, lv, rv)
            except DivisionByZero:
                # Total semantics: division/modulo by zero yields zero.
                if isinstance(lv, Fraction) or isinstance(rv, Fraction):
                    return Fraction(0)
                return 0
        case BUn(op, x):
            return apply_unop(op, _eval(ctx, state, x, env, tenv))
        case BCall(fn, _targs, args):
            vals = [_eval(ctx, state, a, env, tenv) for a in args]
            return _apply_func(ctx, fn, vals)
        case BForall(binders, tvars, body):
            return _eval_quant(ctx, state, binders, tvars, body, env, tenv, True)
        case BExists(binders, tvars, body):
            return _eval_quant(ctx, state, binders, tvars, body, env, tenv, False)
        case BTypeForall(tvars, body):
            return _eval_quant(ctx, state, (), tvars, body, env, tenv, True)
    raise MalformedProgramError(f"bad expression node: {e!r}")


def _eval_quant(ctx, state, binders, tvars, body, env, tenv, is_forall):
    type_choices = [ctx.type_domain() for _ in tvars]
    for types in itertools.product(*type_choices):
        tenv2 = dict(tenv)
        tenv2.update(zip(tvars, types))
        carriers = [ctx.carrier(subst_type(t, tenv2)) for _, t in binders]
        names = [n for n, _ in binders]
        for values in itertools.product(*carriers):
            env2 = dict(env)
            env2.update(zip(names, values))
            v = _eval(ctx, state, body, env2, tenv2)
            if not isinstance(v, bool):
                raise MalformedProgramError("quantifier body must be boolean")
            if is_forall and not v:
                return False
            if not is_forall and v:
                return True
    return is_forall


def axioms_satisfied(ctx: BCtx) -> tuple[bool, BExpr | None]:
    """Evaluate every axiom of the background theory under the canonical
    interpretation; returns the first violated axiom, if any."""
    for ax in ctx.program.axioms:
        if eval_bexpr(ctx, FrozenMap(), ax) is not True:
            return False, ax
    return True, None
