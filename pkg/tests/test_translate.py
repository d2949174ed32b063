"""Source-to-target emission: structural shape of the generated procedures,
background declarations, hint records, mutations, and golden files."""

from __future__ import annotations

import pathlib

import pytest

from vpr2bpl.common import MalformedProgramError
from vpr2bpl.boogie.ast import BAssume, BCall, BBin, BLit, BlockIf
from vpr2bpl.boogie.printer import print_bprogram
from vpr2bpl.translate.emit import MUTATION_KINDS, translate_program
from vpr2bpl.translate.hints import (
    ROLE_TEMP_PERM, WD_CHECKED, WD_OMITTED,
    hints_from_json, hints_to_json,
)
from vpr2bpl.viper.typecheck import load_program

from helpers import normalize_boogie_lines, pipeline

GOLDEN = pathlib.Path(__file__).parent / "golden"

TWO_FIELD_SRC = (GOLDEN / "two_field_write.vpr").read_text()

# Expected normalized body for TWO_FIELD_SRC: the permission bookkeeping of
# the inhale, the double mask check of the field write, and the
# snapshot/decrement/check/havoc sequence of the exhale, wrapped in the
# trivial-spec frame (empty mask, assumed precondition, checked
# postcondition).
TWO_FIELD_BODY = [
    "{",
    "M := ZeroMask;",
    "assume true;",
    "assume GoodMask(M);",
    "if (*) {",
    "assume true;",
    "assume false;",
    "}",
    "tmp := q;",
    "assert tmp >= 0;",
    "assume tmp > 0 ==> x != null;",
    "M[x,f] += tmp;",
    "assume GoodMask(M);",
    "assert M[x,f] > 0;",
    "assert M[y,g] == 1;",
    "H[y,g] := H[x,f] + 1;",
    "assume GoodMask(M);",
    "WM := M;",
    "tmp := q;",
    "assert tmp >= 0;",
    "if (tmp != 0) {",
    "assert M[x,f] >= tmp;",
    "}",
    "M[x,f] -= tmp;",
    "assert WM[y,g] > 0;",
    "assert WM[x,f] > 0;",
    "assert H[y,g] > H[x,f];",
    "havoc Hp;",
    "assume idOnPositive(H, Hp, M);",
    "H := Hp;",
    "assume GoodMask(M);",
    "WM := M;",
    "assert true;",
    "assume GoodMask(M);",
    "}",
]


# ---------------------------------------------------------------------------
# Structural emission shape
# ---------------------------------------------------------------------------

class TestEmissionShape:
    def test_two_field_write_program(self):
        _, result = pipeline(TWO_FIELD_SRC)
        got = normalize_boogie_lines(print_bprogram(result.program))
        assert list(got) == TWO_FIELD_BODY

    def test_minimal_local_assignment(self):
        _, result = pipeline(
            "method m() returns (x: Int)\n{\n  x := 1\n}\n")
        got = normalize_boogie_lines(print_bprogram(result.program))
        assert list(got) == [
            "{",
            "M := ZeroMask;",
            "assume true;",
            "assume GoodMask(M);",
            "if (*) {",
            "havoc x;",            # well-formedness check of the postcondition
            "assume true;",
            "assume false;",
            "}",
            "x := 1;",
            "assume GoodMask(M);",
            "WM := M;",
            "assert true;",
            "assume GoodMask(M);",
            "}",
        ]

    def test_boolean_field_accessibility(self):
        _, result = pipeline(
            "field b: Bool\nmethod m(x: Ref)\n{\n  inhale acc(x.b, 1/2)\n}\n")
        got = normalize_boogie_lines(print_bprogram(result.program))
        assert "M[x,b] += tmp;" in got
        assert "tmp := 1 / 2;" in got
        assert "assume tmp > 0 ==> x != null;" in got


# ---------------------------------------------------------------------------
# Background declarations
# ---------------------------------------------------------------------------

class TestBackground:
    def test_two_field_declarations(self):
        _, result = pipeline(TWO_FIELD_SRC)
        bp = result.program
        assert [c[0] for c in bp.consts] == ["null", "ZeroMask", "f_f", "f_g"]
        assert [f.name for f in bp.funcs] == [
            "readHeap", "updHeap", "readMask", "updMask",
            "GoodMask", "idOnPositive",
        ]
        assert len(bp.axioms) == 7
        assert [g[0] for g in bp.globals_] == ["H", "M"]

    def test_core_is_field_independent(self):
        _, r0 = pipeline("method m()\n{\n  inhale true\n}\n")
        bp = r0.program
        # No field constants, but the full map/mask theory is still present.
        assert [c[0] for c in bp.consts] == ["null", "ZeroMask"]
        assert len(bp.funcs) == 6
        assert len(bp.axioms) == 7

    def test_bool_field_constant_is_typed(self):
        _, result = pipeline(
            "field b: Bool\nmethod m(x: Ref)\n{\n  inhale true\n}\n")
        (ftype,) = [t for n, t in result.program.consts if n == "f_b"]
        assert ftype.name == "bfield"
        assert ftype.args[0].name == "bool"


# ---------------------------------------------------------------------------
# Emitted assumes are restricted to the documented forms
# ---------------------------------------------------------------------------

def _assume_allowed(e) -> bool:
    if e == BLit(True):
        return True
    if isinstance(e, BCall) and e.func in ("GoodMask", "idOnPositive"):
        return True
    # Definedness guard for an inhaled accessibility predicate.
    if isinstance(e, BBin) and e.op == "==>" and isinstance(e.right, BBin) \
            and e.right.op == "!=":
        return True
    if isinstance(e, BLit) and e.value is False:
        return True  # terminator of the postcondition well-formedness block
    return False


def _walk_assumes(body):
    for blk in body:
        for cmd in blk.cmds:
            if isinstance(cmd, BAssume):
                yield cmd.expr
        if isinstance(blk.branch, BlockIf):
            yield from _walk_assumes(blk.branch.then_s)
            yield from _walk_assumes(blk.branch.else_s)


class TestAssumeDiscipline:
    def test_permission_only_program_assume_allowlist(self):
        _, result = pipeline(TWO_FIELD_SRC)
        for e in _walk_assumes(result.program.procs[0].body):
            assert _assume_allowed(e), e

    def test_pure_inhale_becomes_assume(self):
        _, result = pipeline(
            "field f: Int\nmethod m(x: Ref)\n"
            "{\n  inhale acc(x.f, 1/2)\n  inhale x.f > 0\n}\n")
        assumes = list(_walk_assumes(result.program.procs[0].body))
        pure = [e for e in assumes if not _assume_allowed(e)]
        # Exactly the translated pure conjunct escapes the structural forms.
        assert len(pure) == 1
        assert isinstance(pure[0], BBin) and pure[0].op == ">"


# ---------------------------------------------------------------------------
# Determinism and name hygiene
# ---------------------------------------------------------------------------

class TestDeterminism:
    def test_repeat_translation_is_byte_identical(self):
        vp = load_program(TWO_FIELD_SRC)
        a = print_bprogram(translate_program(vp).program)
        b = print_bprogram(translate_program(vp).program)
        assert a == b

    def test_fresh_locals_are_distinct_and_declared(self):
        src = """
field f: Int
method m(x: Ref, q: Perm)
{
  inhale acc(x.f, q)
  exhale acc(x.f, q - 1/2)
  exhale acc(x.f, 1/2)
}
"""
        _, result = pipeline(src)
        proc = result.program.procs[0]
        names = [n for n, _t in proc.locals_]
        assert len(set(names)) == len(names)
        tmps = [n for n in names if n.startswith("tmp")]
        wms = [n for n in names if n.startswith("WM")]
        assert len(tmps) >= 2 and len(wms) >= 2


# ---------------------------------------------------------------------------
# Mutations
# ---------------------------------------------------------------------------

class TestMutations:
    def test_unknown_mutation_rejected(self):
        vp = load_program(TWO_FIELD_SRC)
        with pytest.raises(MalformedProgramError):
            translate_program(vp, mutations=frozenset({"no-such-kind"}))

    def test_every_kind_is_a_single_kebab_tag(self):
        assert len(MUTATION_KINDS) == 13
        for kind in MUTATION_KINDS:
            assert kind == kind.lower() and " " not in kind

    def test_drop_decrement_changes_exhale_only(self):
        vp = load_program(TWO_FIELD_SRC)
        base = normalize_boogie_lines(
            print_bprogram(translate_program(vp).program))
        mut = normalize_boogie_lines(print_bprogram(translate_program(
            vp, mutations=frozenset({"exhale-drop-decrement"})).program))
        assert "M[x,f] -= tmp;" in base
        assert "M[x,f] -= tmp;" not in mut
        assert [l for l in base if l != "M[x,f] -= tmp;"] == list(mut)

    def test_pre_wd_omitted_records_variant(self):
        vp = load_program(TWO_FIELD_SRC)
        mt = translate_program(
            vp, mutations=frozenset({"method-pre-wd-omitted"})).methods[0]
        pre_node = mt.hints.children[0]
        assert pre_node.has_variant(WD_OMITTED)
        base_pre = translate_program(vp).methods[0].hints.children[0]
        assert base_pre.has_variant(WD_CHECKED)


# ---------------------------------------------------------------------------
# Hints
# ---------------------------------------------------------------------------

class TestHints:
    def test_record_maps_sources_to_targets(self):
        _, result = pipeline(TWO_FIELD_SRC)
        rec = result.methods[0].record
        assert set(rec.var.keys()) == {"x", "y", "q"}
        assert set(rec.field.keys()) == {"f", "g"}
        assert rec.h == "H" and rec.m == "M"

    def test_inhale_node_binds_temp_perm(self):
        _, result = pipeline(TWO_FIELD_SRC)
        root = result.methods[0].hints
        body = next(c for c in root.children if c.label == "seq")
        acc_node = body.children[0].children[0]
        assert acc_node.label == "acc"
        name = acc_node.binding(ROLE_TEMP_PERM)
        assert name is not None and name.startswith("tmp")

    def test_json_round_trip(self):
        _, result = pipeline(TWO_FIELD_SRC)
        text = hints_to_json(result.methods)
        assert hints_from_json(text) == result.methods


# ---------------------------------------------------------------------------
# Golden files
# ---------------------------------------------------------------------------

class TestGolden:
    def test_translation_matches_golden(self):
        _, result = pipeline(TWO_FIELD_SRC)
        assert print_bprogram(result.program) == \
            (GOLDEN / "two_field_write.bpl").read_text()

    def test_hints_match_golden(self):
        _, result = pipeline(TWO_FIELD_SRC)
        assert hints_from_json((GOLDEN / "two_field_write.hints.json").read_text()) == \
            result.methods
