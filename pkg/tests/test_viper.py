"""Source-language core: evaluation, inhale/exhale, statement execution,
method correctness, and state algebra."""

from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from vpr2bpl.common import Bounds, FrozenMap
from vpr2bpl.viper import ast as V
from vpr2bpl.viper.ast import NULL, Ref
from vpr2bpl.viper.eval import IllDefined, eval_expr, is_defined, make_ctx
from vpr2bpl.viper.parser import parse_program
from vpr2bpl.viper.semantics import (
    _exhale_aux1, _inhale1, exec_stmt, exhale_aux, inhale, initial_states,
    method_correct, method_root_stmt, non_det_select, spec_well_formed,
)
from vpr2bpl.viper.state import (
    FAILURE, MAGIC, Normal, ViperState, mask_add, mask_leq, mask_sub,
    type_default, zero_mask,
)
from vpr2bpl.viper.typecheck import load_program

from helpers import DEFAULT, TINY

HALF = Fraction(1, 2)
R1 = Ref("r1")
ONE = Fraction(1)


def prog(src: str):
    return load_program(src)


def ctx_for(src: str, method: str = "m"):
    p = prog(src)
    return p, make_ctx(p, p.method(method))


ONE_FIELD = """
field f: Int
method m(x: Ref, y: Ref, q: Perm) returns (z: Int)
{
  inhale true
}
"""

TWO_FIELDS = """
field f: Int
field g: Int
method m(x: Ref, y: Ref, q: Perm)
{
  inhale true
}
"""


def state(ctx, bounds=TINY, **store):
    """A state over the method's variables: defaults plus overrides; zero
    mask, default heap."""
    base = {n: type_default(t) for n, t in ctx.var_types}
    base.update(store)
    fields = [f for f, _ in ctx.field_types]
    locs = [(Ref(r), f) for f in fields for r in bounds.ref_names()]
    heap = FrozenMap({loc: 0 for loc in locs})
    mask = FrozenMap({loc: Fraction(0) for loc in locs})
    return ViperState(FrozenMap(base), heap, mask)


# ---------------------------------------------------------------------------
# Expression evaluation
# ---------------------------------------------------------------------------

class TestEval:
    def test_store_lookup(self):
        _, ctx = ctx_for(ONE_FIELD)
        st0 = state(ctx, z=5)
        assert eval_expr(ctx, st0, V.Var("z")) == 5

    def test_literal_arithmetic(self):
        _, ctx = ctx_for(ONE_FIELD)
        e = V.BinOp(V.Lit(1), "+", V.Lit(1))
        assert eval_expr(ctx, state(ctx), e) == 2

    def test_division_by_zero_is_ill_defined(self):
        _, ctx = ctx_for(ONE_FIELD)
        e = V.BinOp(V.Lit(1), "/", V.Lit(0))
        with pytest.raises(IllDefined):
            eval_expr(ctx, state(ctx), e)
        assert not is_defined(ctx, state(ctx), e)

    def test_field_read_needs_positive_permission(self):
        _, ctx = ctx_for(ONE_FIELD)
        st0 = state(ctx, x=R1)
        e = V.FieldAcc(V.Var("x"), "f")
        with pytest.raises(IllDefined):
            eval_expr(ctx, st0, e)
        assert eval_expr(ctx, st0.set_mask((R1, "f"), HALF), e) == 0


# ---------------------------------------------------------------------------
# Exhale (check-and-remove pass)
# ---------------------------------------------------------------------------

class TestExhaleAux:
    def test_removes_permission(self):
        _, ctx = ctx_for(ONE_FIELD)
        st0 = state(ctx, x=R1).set_mask((R1, "f"), ONE)
        a = V.Acc(V.Var("x"), "f", V.Lit(HALF))
        out = _exhale_aux1(ctx, a, st0, st0)
        assert isinstance(out, Normal)
        assert out.state.mask[(R1, "f")] == HALF

    def test_false_pure_conjunct_fails(self):
        _, ctx = ctx_for(ONE_FIELD)
        st0 = state(ctx, x=R1).set_mask((R1, "f"), ONE)
        a = V.Sep(
            V.Acc(V.Var("x"), "f", V.Lit(HALF)),
            V.Pure(V.BinOp(V.FieldAcc(V.Var("x"), "f"), ">", V.Lit(1))),
        )
        assert _exhale_aux1(ctx, a, st0, st0) is FAILURE

    def test_insufficient_permission_fails(self):
        _, ctx = ctx_for(ONE_FIELD)
        st0 = state(ctx, x=R1).set_mask((R1, "f"), HALF)
        a = V.Acc(V.Var("x"), "f", V.Lit(ONE))
        assert _exhale_aux1(ctx, a, st0, st0) is FAILURE

    def test_outcome_set_wrapper(self):
        _, ctx = ctx_for(ONE_FIELD)
        st0 = state(ctx, x=R1).set_mask((R1, "f"), ONE)
        a = V.Acc(V.Var("x"), "f", V.Lit(HALF))
        outs = exhale_aux(ctx, a, st0, st0)
        assert len(outs) == 1 and all(isinstance(o, Normal) for o in outs)


# ---------------------------------------------------------------------------
# Nondeterministic heap selection
# ---------------------------------------------------------------------------

class TestNonDetSelect:
    def test_no_drop_is_identity(self):
        _, ctx = ctx_for(ONE_FIELD)
        st0 = state(ctx, x=R1).set_mask((R1, "f"), HALF)
        assert set(non_det_select(ctx, st0, st0, TINY)) == {st0}

    def test_one_dropped_location_enumerates_domain(self):
        _, ctx = ctx_for(ONE_FIELD)
        orig = state(ctx, x=R1).set_mask((R1, "f"), ONE)
        after = orig.set_mask((R1, "f"), Fraction(0))
        succ = set(non_det_select(ctx, orig, after, TINY))
        assert len(succ) == 3  # one Int location over [-1, 1]
        assert {s.heap[(R1, "f")] for s in succ} == {-1, 0, 1}

    def test_two_dropped_locations_enumerate_product(self):
        _, ctx = ctx_for(TWO_FIELDS)
        orig = state(ctx, x=R1)
        orig = orig.set_mask((R1, "f"), ONE).set_mask((R1, "g"), ONE)
        after = orig.set_mask((R1, "f"), Fraction(0)).set_mask(
            (R1, "g"), Fraction(0))
        assert len(set(non_det_select(ctx, orig, after, TINY))) == 9

    def test_positive_permission_locations_are_framed(self):
        _, ctx = ctx_for(ONE_FIELD)
        orig = state(ctx, x=R1).set_mask((R1, "f"), ONE)
        orig = orig.set_heap((R1, "f"), 1)
        after = orig.set_mask((R1, "f"), HALF)
        assert set(non_det_select(ctx, orig, after, TINY)) == {after}


# ---------------------------------------------------------------------------
# Inhale
# ---------------------------------------------------------------------------

class TestInhale:
    def test_mask_overflow_stops(self):
        _, ctx = ctx_for(ONE_FIELD)
        st0 = state(ctx, x=R1).set_mask((R1, "f"), HALF)
        a = V.Acc(V.Var("x"), "f", V.Lit(ONE))
        assert _inhale1(ctx, a, st0) is MAGIC  # mask 3/2 is inconsistent

    def test_null_receiver_with_positive_permission_stops(self):
        _, ctx = ctx_for(ONE_FIELD)
        st0 = state(ctx, q=HALF)  # x defaults to null
        a = V.Acc(V.Var("x"), "f", V.Var("q"))
        assert _inhale1(ctx, a, st0) is MAGIC

    def test_negative_permission_fails(self):
        _, ctx = ctx_for(ONE_FIELD)
        st0 = state(ctx, x=R1)
        a = V.Acc(V.Var("x"), "f", V.Lit(Fraction(-1)))
        assert _inhale1(ctx, a, st0) is FAILURE

    def test_outcome_set_wrapper(self):
        _, ctx = ctx_for(ONE_FIELD)
        st0 = state(ctx, x=R1)
        a = V.Acc(V.Var("x"), "f", V.Lit(HALF))
        outs = inhale(ctx, a, st0)
        assert {type(o) for o in outs} == {Normal}


# ---------------------------------------------------------------------------
# Statement execution
# ---------------------------------------------------------------------------

class TestExecStmt:
    def test_exhale_without_permission_fails(self):
        _, ctx = ctx_for(ONE_FIELD)
        st0 = state(ctx, x=R1).set_mask((R1, "f"), HALF)
        s = V.Exhale(V.Acc(V.Var("x"), "f", V.Lit(ONE)))
        assert exec_stmt(ctx, s, st0, TINY) == frozenset({FAILURE})

    def test_magic_absorbs_sequencing(self):
        _, ctx = ctx_for(ONE_FIELD)
        s = V.Seq(V.Inhale(V.Pure(V.Lit(False))),
                  V.LocalAssign("z", V.Lit(1)))
        assert exec_stmt(ctx, s, state(ctx), TINY) == frozenset({MAGIC})

    def test_heap_roundtrip_snippet(self):
        # inhale full permission, write, exhale with a pure check relating
        # the written value: no failure from any bounded initial value.
        src = """
field f: Int
field g: Int
method m(x: Ref, y: Ref, q: Perm)
{
  inhale acc(x.f, q)
  inhale acc(y.g, 1/1)
  y.g := x.f + 1
  exhale (acc(x.f, q) && y.g > x.f)
}
"""
        p = prog(src)
        m = p.method("m")
        ctx = make_ctx(p, m)
        bounds = Bounds(refs=2, int_lo=-2, int_hi=2, perm_denom=2)
        for init in initial_states(p, m, bounds):
            if init.store["q"] != ONE:
                continue
            outs = exec_stmt(ctx, m.body, init, bounds)
            assert FAILURE not in outs
            for o in outs:
                if isinstance(o, Normal):
                    st1 = o.state
                    x, y = st1.store["x"], st1.store["y"]
                    # All inhaled permission to x.f was exhaled again; the
                    # write permission to y.g is retained (so the location
                    # was framed across the final nondeterministic
                    # selection).
                    assert st1.mask[(x, "f")] == 0
                    assert st1.mask[(y, "g")] == ONE

    def test_write_without_full_permission_fails(self):
        # The same snippet fails when the write permission inhale is dropped.
        src = """
field f: Int
field g: Int
method m(x: Ref, y: Ref, q: Perm)
{
  inhale acc(x.f, q)
  y.g := x.f + 1
}
"""
        p = prog(src)
        m = p.method("m")
        ctx = make_ctx(p, m)
        failing = False
        for init in initial_states(p, m, TINY):
            if FAILURE in exec_stmt(ctx, m.body, init, TINY):
                failing = True
        assert failing


# ---------------------------------------------------------------------------
# Mask algebra
# ---------------------------------------------------------------------------

class TestMaskAlgebra:
    def test_add(self):
        m = FrozenMap({(R1, "f"): HALF})
        assert mask_add(m, m)[(R1, "f")] == ONE

    def test_sub_self_is_zero(self):
        m = FrozenMap({(R1, "f"): HALF})
        assert mask_sub(m, m) == FrozenMap({(R1, "f"): Fraction(0)})

    def test_zero_below_everything(self):
        z = zero_mask(["f"], TINY)
        m = FrozenMap({(R1, "f"): ONE})
        assert mask_leq(z, m)
        assert not mask_leq(m, z)


# ---------------------------------------------------------------------------
# Method correctness and specification well-formedness
# ---------------------------------------------------------------------------

class TestMethodCorrect:
    def test_write_after_full_inhale(self):
        src = """
field f: Int
method m(x: Ref)
{
  inhale acc(x.f, 1/1)
  x.f := 2
}
"""
        p = prog(src)
        ok, _ = method_correct(p, p.method("m"), TINY)
        assert ok

    def test_write_without_permission(self):
        src = """
field f: Int
method m(x: Ref)
{
  x.f := 2
}
"""
        p = prog(src)
        ok, witness = method_correct(p, p.method("m"), TINY)
        assert not ok and witness is not None

    def test_value_carrying_precondition(self):
        src = """
field f: Int
method m(x: Ref)
  requires acc(x.f) && x.f > 1
{
  inhale true
}
"""
        p = prog(src)
        ok, _ = method_correct(p, p.method("m"), DEFAULT)
        assert ok

    def test_root_statement_shape(self):
        p = prog("field f: Int\nmethod m(x: Ref)\n{\n  inhale true\n}\n")
        root = method_root_stmt(p.method("m"))
        assert isinstance(root, V.Seq) and isinstance(root.first, V.Inhale)


class TestSpecWellFormed:
    def test_read_after_permission(self):
        src = """
field f: Int
method m(x: Ref)
  requires acc(x.f) && x.f > 1
{
  inhale true
}
"""
        p = prog(src)
        ok, _ = spec_well_formed(p, p.method("m"), DEFAULT)
        assert ok

    def test_read_without_permission(self):
        src = """
field f: Int
method m(x: Ref)
  requires x.f > 1
{
  inhale true
}
"""
        p = prog(src)
        ok, why = spec_well_formed(p, p.method("m"), TINY)
        assert not ok and why

    def test_trivial_spec(self):
        p = prog("field f: Int\nmethod m(x: Ref)\n{\n  inhale true\n}\n")
        ok, _ = spec_well_formed(p, p.method("m"), TINY)
        assert ok


# ---------------------------------------------------------------------------
# Semantic properties
# ---------------------------------------------------------------------------

_P = prog("""
field f: Int
method m(x: Ref, q: Perm) returns (z: Int)
{
  inhale true
}
""")
_CTX = make_ctx(_P, _P.method("m"))
_LOCS = [(R1, "f")]

perm_values = st.sampled_from([Fraction(0), HALF, ONE])
int_values = st.integers(min_value=-1, max_value=1)
ref_values = st.sampled_from([NULL, R1])


@st.composite
def states(draw):
    store = FrozenMap({
        "x": draw(ref_values), "q": draw(perm_values), "z": draw(int_values),
    })
    heap = FrozenMap({loc: draw(int_values) for loc in _LOCS})
    mask = FrozenMap({loc: draw(perm_values) for loc in _LOCS})
    return ViperState(store, heap, mask)


@st.composite
def assertions(draw):
    atoms = [
        V.Acc(V.Var("x"), "f", V.Lit(HALF)),
        V.Acc(V.Var("x"), "f", V.Var("q")),
        V.Pure(V.BinOp(V.FieldAcc(V.Var("x"), "f"), ">", V.Lit(0))),
        V.Pure(V.Lit(True)),
    ]
    a = draw(st.sampled_from(atoms))
    if draw(st.booleans()):
        b = draw(st.sampled_from(atoms))
        a = V.Sep(a, b)
    return a


@given(states(), assertions())
@settings(max_examples=300, deadline=None)
def test_normal_outcomes_stay_consistent(st0, a):
    for op in (lambda: _inhale1(_CTX, a, st0),
               lambda: _exhale_aux1(_CTX, a, st0, st0)):
        out = op()
        if isinstance(out, Normal):
            assert out.state.consistent()


@given(states(), assertions())
@settings(max_examples=300, deadline=None)
def test_exhale_only_removes_permission(st0, a):
    out = _exhale_aux1(_CTX, a, st0, st0)
    if isinstance(out, Normal):
        assert mask_leq(out.state.mask, st0.mask)
        assert out.state.store == st0.store
        assert out.state.heap == st0.heap


@given(states(), assertions())
@settings(max_examples=200, deadline=None)
def test_nondet_select_frames_positive_permission(st0, a):
    out = _exhale_aux1(_CTX, a, st0, st0)
    if not isinstance(out, Normal):
        return
    for succ in non_det_select(_CTX, st0, out.state, TINY):
        for loc, p in succ.mask.items():
            if p > 0:
                assert succ.heap[loc] == st0.heap[loc]
