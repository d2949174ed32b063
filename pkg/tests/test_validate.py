"""Certificates: construction, serialization, checking, tamper rejection,
oracle counterexamples, and the specification dependency closure."""

from __future__ import annotations

import dataclasses
import json

import pytest

from vpr2bpl.common import FormatError
from vpr2bpl.boogie.printer import print_bprogram
from vpr2bpl.validate.build import build_certificate
from vpr2bpl.validate.certificate import (
    CERT_FORMAT, cert_from_json, cert_to_json,
)
from vpr2bpl.validate.check import (
    MethodVerdict, check_certificate, combine_method_verdicts,
)
from vpr2bpl.viper.printer import print_program

from corpus import HARMLESS_MUTANTS, MUTANT_PROGRAMS, NONLOCAL_PAIR
from helpers import TINY, pipeline, validate_source

DEMO = MUTANT_PROGRAMS["demo"]


@pytest.fixture(scope="module")
def built():
    program, result = pipeline(DEMO)
    cert = build_certificate(program, result, TINY)
    return (cert, print_program(program), print_bprogram(result.program))


def _retree(cert, tree):
    mc = cert.methods[0]
    return dataclasses.replace(
        cert, methods=(dataclasses.replace(mc, tree=tree),))


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

class TestSerde:
    def test_json_round_trip(self, built):
        cert, _, _ = built
        assert cert_from_json(cert_to_json(cert)) == cert

    def test_format_marker_present(self, built):
        cert, _, _ = built
        assert json.loads(cert_to_json(cert))["format"] == CERT_FORMAT

    def test_unknown_format_rejected(self, built):
        cert, _, _ = built
        raw = json.loads(cert_to_json(cert))
        raw["format"] = "bogus"
        with pytest.raises(FormatError):
            cert_from_json(json.dumps(raw))


# ---------------------------------------------------------------------------
# Accepted pipeline and digest discipline
# ---------------------------------------------------------------------------

class TestCheck:
    def test_built_certificate_is_accepted(self, built):
        cert, src, tgt = built
        v = check_certificate(cert, src, tgt)
        assert v.accepted, v
        assert all(mv.accepted for mv in v.methods)

    def test_formatting_changes_do_not_invalidate(self, built):
        cert, src, tgt = built
        v = check_certificate(cert, src + "\n\n", "  " + tgt)
        assert v.accepted

    def test_source_content_change_is_rejected(self, built):
        cert, src, tgt = built
        v = check_certificate(cert, src.replace("1/2", "1/1"), tgt)
        assert not v.accepted
        assert "certificate" in v.reason

    def test_target_content_change_is_rejected(self, built):
        cert, src, tgt = built
        v = check_certificate(cert, src, tgt.replace("tmp1 := 1.0 / 2.0;", "tmp1 := 1.0;"))
        assert not v.accepted
        assert "certificate" in v.reason


# ---------------------------------------------------------------------------
# Tampered trees
# ---------------------------------------------------------------------------

class TestTamper:
    def test_bad_cursor_is_rejected_not_crashed(self, built):
        cert, src, tgt = built
        root = cert.methods[0].tree
        bad = dataclasses.replace(root, params=(("mid", ((0, 99),)),))
        v = check_certificate(_retree(cert, bad), src, tgt)
        assert not v.accepted
        assert "bad" in v.methods[0].reason

    def test_truncated_children_rejected_with_arity(self, built):
        cert, src, tgt = built
        root = cert.methods[0].tree
        trunc = dataclasses.replace(root, children=root.children[:1])
        v = check_certificate(_retree(cert, trunc), src, tgt)
        assert not v.accepted
        assert "children" in v.methods[0].reason

    def test_wrong_rule_at_root_rejected(self, built):
        cert, src, tgt = built
        root = cert.methods[0].tree
        wrong = dataclasses.replace(root, rule="IfSim")
        v = check_certificate(_retree(cert, wrong), src, tgt)
        assert not v.accepted
        assert "bad rule application" in v.methods[0].reason

    def test_rejection_reports_a_path(self, built):
        cert, src, tgt = built
        root = cert.methods[0].tree
        # Damage one grandchild so the failure is located below the root.
        child = root.children[1]
        bad_child = dataclasses.replace(child, rule="IfSim")
        bad = dataclasses.replace(
            root, children=(root.children[0], bad_child))
        v = check_certificate(_retree(cert, bad), src, tgt)
        assert not v.accepted
        assert v.methods[0].path == (1,)


# ---------------------------------------------------------------------------
# Mutants and oracle counterexamples
# ---------------------------------------------------------------------------

class TestMutants:
    def test_dropped_decrement_yields_counterexample(self):
        v = validate_source(
            DEMO, mutations=frozenset({"exhale-drop-decrement"}))
        assert not v.accepted
        (mv,) = [m for m in v.methods if not m.accepted]
        cx = mv.counterexample
        assert cx is not None and cx.reason == "missed-success"
        ev, red = cx.tau
        assert ev.consistent() and red.consistent()

    def test_dropped_sufficiency_check_misses_failures(self):
        v = validate_source(
            DEMO, mutations=frozenset({"exhale-drop-suff-assert"}))
        assert not v.accepted
        (mv,) = [m for m in v.methods if not m.accepted]
        assert mv.counterexample.reason == "missed-failure"

    @pytest.mark.parametrize("kind", sorted(k for _n, k in HARMLESS_MUTANTS))
    def test_harmless_weakenings_still_validate(self, kind):
        v = validate_source(DEMO, mutations=frozenset({kind}))
        assert v.accepted
        assert v.flags == ()


# ---------------------------------------------------------------------------
# Dependency closure across methods
# ---------------------------------------------------------------------------

class TestDependencies:
    def test_call_records_callee_requirement(self):
        v = validate_source(NONLOCAL_PAIR)
        assert v.accepted
        by_name = {mv.method: mv for mv in v.methods}
        assert by_name["caller"].requires == ("callee",)
        assert by_name["callee"].requires == ()

    def test_combine_rejects_missing_dependency(self):
        caller = MethodVerdict("caller", True, requires=("callee",))
        assert not combine_method_verdicts((caller,)).accepted

    def test_combine_rejects_failed_dependency(self):
        caller = MethodVerdict("caller", True, requires=("callee",))
        callee = MethodVerdict("callee", False, "goal violated")
        assert not combine_method_verdicts((caller, callee)).accepted

    def test_combine_accepts_closed_set(self):
        caller = MethodVerdict("caller", True, requires=("callee",))
        callee = MethodVerdict("callee", True)
        assert combine_method_verdicts((caller, callee)).accepted
