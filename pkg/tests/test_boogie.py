"""Target-language core: expression evaluation under the canonical
interpretation, small-step execution, cursors, and procedure correctness."""

from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from vpr2bpl.common import Bounds, FrozenMap
from vpr2bpl.boogie.ast import (
    BAssert, BAssign, BAssume, BBin, BCall, BForall, BHavoc, BLit, BProc,
    BVar, Block, BlockIf, INT, REAL,
)
from vpr2bpl.boogie.interp import (
    axioms_satisfied, canonical_interpretation, eval_bexpr,
)
from vpr2bpl.boogie.parser import parse_bprogram
from vpr2bpl.boogie.printer import print_bprogram
from vpr2bpl.boogie.semantics import (
    TERMINAL, normalize, proc_correct, resolve_cursor, run, start_point,
)
from vpr2bpl.boogie.values import NULL, Ref

from helpers import DEFAULT, TINY, pipeline

ONE_FIELD_BG = """
field f: Int
method m(x: Ref)
{
  inhale true
}
"""


@pytest.fixture(scope="module")
def bctx():
    _, result = pipeline(ONE_FIELD_BG)
    return canonical_interpretation(result.program, TINY)


def _block(*cmds, branch=None):
    return Block(tuple(cmds), branch)


def _proc(name, body, locals_=(), params=()):
    return BProc(name, tuple(params), tuple(locals_), tuple(body))


# ---------------------------------------------------------------------------
# Expression evaluation
# ---------------------------------------------------------------------------

class TestEvalBexpr:
    def test_arithmetic(self, bctx):
        e = BBin(BLit(1), "+", BLit(2))
        assert eval_bexpr(bctx, FrozenMap(), e) == 3

    def test_forall_identity(self, bctx):
        e = BForall((("x", INT),), (),
                    BBin(BBin(BVar("x"), "*", BLit(0)), "==", BLit(0)))
        assert eval_bexpr(bctx, FrozenMap(), e) is True

    def test_goodmask_rejects_oversized_entry(self, bctx):
        tok = bctx.field_tokens[0]
        from vpr2bpl.boogie.values import EMPTY_MASK
        good = EMPTY_MASK.upd(Ref("r1"), tok, Fraction(1))
        bad = EMPTY_MASK.upd(Ref("r1"), tok, Fraction(3, 2))
        gm = lambda m: eval_bexpr(
            bctx, FrozenMap({"m": m}), BCall("GoodMask", (), (BVar("m"),))
        )
        assert gm(good) is True
        assert gm(bad) is False

    def test_read_after_update(self, bctx):
        from vpr2bpl.boogie.values import EMPTY_HEAP
        tok = bctx.field_tokens[0]
        st = FrozenMap({"h": EMPTY_HEAP.upd(Ref("r1"), tok, 7)})
        e = BCall("readHeap", (), (BVar("h"), BVar("r1v"), BVar("fv")))
        st = st.set("r1v", Ref("r1")).set("fv", tok)
        assert eval_bexpr(bctx, st, e) == 7

    def test_read_default_value(self, bctx):
        from vpr2bpl.boogie.values import EMPTY_HEAP
        tok = bctx.field_tokens[0]
        st = FrozenMap({"h": EMPTY_HEAP, "r": Ref("r1"), "fv": tok})
        e = BCall("readHeap", (), (BVar("h"), BVar("r"), BVar("fv")))
        assert eval_bexpr(bctx, st, e) == 0


# ---------------------------------------------------------------------------
# Axiom satisfaction
# ---------------------------------------------------------------------------

class TestAxioms:
    def test_generated_background_holds(self, bctx):
        ok, violated = axioms_satisfied(bctx)
        assert ok, violated

    def test_empty_axiom_set_holds(self):
        bp = parse_bprogram("procedure p()\n{\n    assume true;\n}\n")
        ctx = canonical_interpretation(bp, TINY)
        assert axioms_satisfied(ctx) == (True, None)

    def test_falsified_axiom_detected(self, bctx):
        from dataclasses import replace
        bad = replace(
            bctx.program,
            axioms=bctx.program.axioms + (BLit(False),),
        )
        ctx = canonical_interpretation(bad, TINY)
        ok, violated = axioms_satisfied(ctx)
        assert not ok and violated == BLit(False)


# ---------------------------------------------------------------------------
# Execution
# ---------------------------------------------------------------------------

class TestRun:
    def test_empty_body(self, bctx):
        body = (_block(),)
        res = run(bctx, start_point(body), FrozenMap())
        assert not res.failed

    def test_assert_false_fails(self, bctx):
        body = (_block(BAssert(BLit(False))),)
        res = run(bctx, start_point(body), FrozenMap())
        assert res.failed

    def test_assume_false_prunes(self, bctx):
        body = (_block(BAssume(BLit(False)), BAssert(BLit(False))),)
        res = run(bctx, start_point(body), FrozenMap())
        assert not res.failed

    def test_havoc_enumerates_carrier(self, bctx):
        body = (_block(BHavoc("v")),)
        proc = _proc("p", body, locals_=(("v", INT),))
        res = run(bctx, start_point(body), FrozenMap(),
                  target=TERMINAL, scope=proc)
        assert {st["v"] for st in res.at_target} == {-1, 0, 1}

    def test_nondet_branch_reaches_both_arms(self, bctx):
        body = (
            _block(branch=BlockIf(None,
                                  (_block(BAssign("v", BLit(1))),),
                                  (_block(BAssign("v", BLit(2))),))),
            _block(),
        )
        res = run(bctx, start_point(body), FrozenMap(), target=TERMINAL)
        assert {st["v"] for st in res.at_target} == {1, 2}

    def test_conditional_branch_follows_condition(self, bctx):
        body = (
            _block(branch=BlockIf(BBin(BVar("v"), ">", BLit(0)),
                                  (_block(BAssign("w", BLit(1))),),
                                  (_block(BAssign("w", BLit(2))),))),
            _block(),
        )
        res = run(bctx, start_point(body), FrozenMap({"v": 1}),
                  target=TERMINAL)
        assert {st["w"] for st in res.at_target} == {1}


class TestProcCorrect:
    def test_assert_true(self, bctx):
        proc = _proc("p", (_block(BAssert(BLit(True))),))
        assert proc_correct(bctx, proc) == (True, None)

    def test_havoc_then_sign_assert(self, bctx):
        body = (_block(BHavoc("v"),
                       BAssert(BBin(BVar("v"), ">=", BLit(0)))),)
        proc = _proc("p", body, locals_=(("v", INT),))
        ok, witness = proc_correct(bctx, proc)
        assert not ok
        assert witness["v"] < 0

    def test_generated_roundtrip_procedure(self):
        src = """
field f: Int
method m(x: Ref, q: Perm)
{
  inhale acc(x.f, q)
  exhale acc(x.f, q)
}
"""
        _, result = pipeline(src)
        ctx = canonical_interpretation(result.program, TINY)
        proc = result.program.procs[0]
        ok, witness = proc_correct(ctx, proc)
        assert ok, witness


# ---------------------------------------------------------------------------
# Cursors and program points
# ---------------------------------------------------------------------------

class TestCursors:
    BODY = (
        _block(BAssign("a", BLit(1)),
               branch=BlockIf(BLit(True),
                              (_block(BAssign("b", BLit(2))),),
                              (_block(BAssign("b", BLit(3))),))),
        _block(BAssign("c", BLit(4))),
    )

    def test_start_is_first_command(self):
        assert resolve_cursor(self.BODY, ((0, 0),)) == \
            normalize(start_point(self.BODY))

    def test_branch_descent(self):
        pt = resolve_cursor(self.BODY, ((0, "T"), (0, 0)))
        blk, _cont = pt.block, pt.cont
        assert blk.cmds and blk.cmds[0] == BAssign("b", BLit(2))

    def test_one_past_last_equals_next_block(self):
        past = resolve_cursor(self.BODY, ((1, 1),))
        assert past == TERMINAL or past.block.cmds == ()

    @given(st.sampled_from([((0, 0),), ((0, 1),), ((1, 0),), ((1, 1),),
                            ((0, "T"), (0, 0)), ((0, "E"), (0, 1))]))
    @settings(max_examples=20, deadline=None)
    def test_resolution_is_stable(self, cursor):
        a = resolve_cursor(self.BODY, cursor)
        b = resolve_cursor(self.BODY, cursor)
        assert a == b and normalize(a) == a


# ---------------------------------------------------------------------------
# Parser / printer round-trip
# ---------------------------------------------------------------------------

class TestRoundTrip:
    def test_generated_program_roundtrips(self):
        _, result = pipeline("""
field f: Int
method m(x: Ref) returns (y: Int)
  requires acc(x.f, 1/2)
{
  y := x.f
  if (y > 0) {
    y := 0
  } else {
    inhale true
  }
}
""")
        text = print_bprogram(result.program)
        assert print_bprogram(parse_bprogram(text)) == text

    def test_reparsed_program_is_equal(self):
        _, result = pipeline(ONE_FIELD_BG)
        text = print_bprogram(result.program)
        assert parse_bprogram(text) == result.program
