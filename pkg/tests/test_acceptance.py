"""End-to-end acceptance suite.

Eight checks, each exercising the full pipeline against an independent
semantic oracle:

1. golden structural translation of the two-field write example, under 1 s;
2. corpus-wide soundness differential between the two exhaustive
   interpreters at default bounds, no certificate machinery involved;
3. certificate build+check accepted on the whole corpus at default bounds,
   within a per-method time budget;
4. emitter-weakening mutants rejected or flagged at a >= 90% rate, the
   remainder shown harmless by the differential;
5. exhaustive check of the exhale/inhale inversion property over all
   depth-<=2 assertions from a fixed vocabulary;
6. the canonical interpretation satisfies every emitted axiom exhaustively;
7. per-rule soundness sampling: >= 100 instances of every rule identifier
   whose premises and side conditions hold have valid conclusions;
8. a two-method program whose call-site encoding leans on the callee's
   specification check: removing that check flips the verdict.
"""

from __future__ import annotations

import itertools
import time
from collections import Counter
from fractions import Fraction

import pytest

from vpr2bpl.common import Bounds, FrozenMap, PairBudget
from vpr2bpl.boogie.interp import axioms_satisfied, canonical_interpretation
from vpr2bpl.boogie.printer import print_bprogram
from vpr2bpl.boogie.semantics import proc_correct
from vpr2bpl.sim.goals import SimulationGoal
from vpr2bpl.sim.qpred import Q_INH, inversion_holds
from vpr2bpl.sim.relation import SR
from vpr2bpl.sim.rules import RULE_NAMES, RuleApp, RuleError, apply_rule
from vpr2bpl.validate.build import build_certificate
from vpr2bpl.validate.check import (
    _discharge, _terminal_cursor, check_certificate,
)
from vpr2bpl.validate.oracle import MethodContext, oracle_check
from vpr2bpl.viper import ast as V
from vpr2bpl.viper.ast import NULL, Ref
from vpr2bpl.viper.eval import make_ctx
from vpr2bpl.viper.printer import print_program
from vpr2bpl.viper.semantics import method_correct, method_root_stmt
from vpr2bpl.viper.state import ViperState
from vpr2bpl.viper.typecheck import load_program

from corpus import (
    CAUGHT_MUTANTS, HARMLESS_MUTANTS, MUTANT_PROGRAMS, NONLOCAL_PAIR,
    full_corpus, generate_rule_farm_program,
)
from helpers import (
    DEFAULT, SMALL, TINY, normalize_boogie_lines, pipeline, validate_source,
)
from test_translate import TWO_FIELD_BODY, TWO_FIELD_SRC

CORPUS = full_corpus()
CORPUS_IDS = sorted(CORPUS)


# ---------------------------------------------------------------------------
# 1. Golden structural translation
# ---------------------------------------------------------------------------

class TestGoldenTranslation:
    def test_structural_diff_in_under_one_second(self):
        start = time.monotonic()
        _, result = pipeline(TWO_FIELD_SRC)
        got = normalize_boogie_lines(print_bprogram(result.program))
        elapsed = time.monotonic() - start
        assert list(got) == TWO_FIELD_BODY
        assert elapsed < 1.0, f"translation+diff took {elapsed:.2f}s"


# ---------------------------------------------------------------------------
# 2. Corpus soundness differential (no certificates involved)
# ---------------------------------------------------------------------------

class TestCorpusDifferential:
    def test_no_soundness_gap_across_corpus(self):
        assert len(CORPUS) >= 50
        start = time.monotonic()
        gaps = []
        for name in CORPUS_IDS:
            program, result = pipeline(CORPUS[name])
            bctx = canonical_interpretation(result.program, DEFAULT)
            procs_ok = all(
                proc_correct(bctx, p)[0] for p in result.program.procs
            )
            if not procs_ok:
                continue
            for m in program.methods:
                ok, witness = method_correct(program, m, DEFAULT)
                if not ok:
                    gaps.append((name, m.name, witness))
        elapsed = time.monotonic() - start
        assert gaps == []
        assert elapsed <= 15 * 60, f"differential took {elapsed:.0f}s"


# ---------------------------------------------------------------------------
# 3. Certificate pipeline on the whole corpus
# ---------------------------------------------------------------------------

class TestCertificatePipeline:
    @pytest.mark.parametrize("name", CORPUS_IDS)
    def test_build_and_check_accepted(self, name):
        program, result = pipeline(CORPUS[name])
        cert = build_certificate(program, result, DEFAULT)
        start = time.monotonic()
        verdict = check_certificate(
            cert, print_program(program), print_bprogram(result.program),
            PairBudget(DEFAULT.max_pairs),
        )
        elapsed = time.monotonic() - start
        assert verdict.accepted, (name, verdict)
        per_method = elapsed / max(1, len(program.methods))
        assert per_method <= 60, f"{name}: {per_method:.1f}s per method"


# ---------------------------------------------------------------------------
# 4. Mutation detection
# ---------------------------------------------------------------------------

class TestMutationDetection:
    def test_matrix_covers_every_mutation_kind(self):
        from vpr2bpl.translate.emit import MUTATION_KINDS
        exercised = {k for _n, k in CAUGHT_MUTANTS + HARMLESS_MUTANTS}
        assert exercised == MUTATION_KINDS
        assert len(CAUGHT_MUTANTS) + len(HARMLESS_MUTANTS) >= 10

    def test_detection_rate_at_least_ninety_percent(self):
        total = len(CAUGHT_MUTANTS) + len(HARMLESS_MUTANTS)
        assert len(CAUGHT_MUTANTS) / total >= 0.9

    @pytest.mark.parametrize("name,kind", CAUGHT_MUTANTS,
                             ids=[f"{n}-{k}" for n, k in CAUGHT_MUTANTS])
    def test_mutant_is_rejected_or_flagged(self, name, kind):
        v = validate_source(
            MUTANT_PROGRAMS[name], bounds=TINY, mutations=frozenset({kind}))
        assert (not v.accepted) or v.flags, (name, kind, v)

    @pytest.mark.parametrize("name,kind", HARMLESS_MUTANTS,
                             ids=[f"{n}-{k}" for n, k in HARMLESS_MUTANTS])
    def test_harmless_mutant_shown_equivalent_by_differential(self, name, kind):
        v = validate_source(
            MUTANT_PROGRAMS[name], bounds=TINY, mutations=frozenset({kind}))
        assert v.accepted and v.flags == ()
        # The differential oracle agrees the weakened translation still
        # refuses exactly the incorrect executions.
        program, result = pipeline(MUTANT_PROGRAMS[name],
                                   mutations=frozenset({kind}))
        bctx = canonical_interpretation(result.program, TINY)
        for m, proc in zip(program.methods, result.program.procs):
            assert proc_correct(bctx, proc)[0] == \
                method_correct(program, m, TINY)[0]


# ---------------------------------------------------------------------------
# 5. Inversion property brute force
# ---------------------------------------------------------------------------

def _inversion_vocabulary():
    """All assertions of depth <= 2 over a fixed atom vocabulary: two
    receivers, one field, literal permissions {0, 1/2, 1}, and three value
    comparisons; conditions for implication/conditional come from a
    two-element pool."""
    def acc(x, p):
        return V.Acc(V.Var(x), "f", V.Lit(Fraction(p)))

    def rd(x):
        return V.FieldAcc(V.Var(x), "f")

    accs = [acc(x, p) for x in ("x", "y")
            for p in (0, Fraction(1, 2), 1)]
    cmps = [V.Pure(V.BinOp(rd("x"), ">", V.Lit(0))),
            V.Pure(V.BinOp(rd("x"), "==", rd("y"))),
            V.Pure(V.BinOp(V.Var("x"), "==", V.Var("y")))]
    atoms = accs + cmps
    conds = [V.BinOp(rd("x"), ">", V.Lit(0)),
             V.BinOp(V.Var("x"), "==", V.Var("y"))]
    out = list(atoms)
    out += [V.Sep(a, b) for a in atoms for b in atoms]
    out += [V.Implies(c, a) for c in conds for a in atoms]
    out += [V.CondAssert(c, a, b) for c in conds for a in atoms for b in atoms]
    return out


class TestInversionBruteForce:
    def test_exhaustive_over_vocabulary(self):
        start = time.monotonic()
        program = load_program(
            "field f: Int\nmethod m(x: Ref, y: Ref)\n{\n  inhale true\n}\n")
        vctx = make_ctx(program, program.methods[0])
        refs = [Ref("r1"), Ref("r2"), NULL]
        locs = [(Ref("r1"), "f"), (Ref("r2"), "f")]
        perms = [Fraction(0), Fraction(1, 2), Fraction(1)]
        stores = [FrozenMap({"x": a, "y": b}) for a in refs for b in refs]
        heaps = [FrozenMap(dict(zip(locs, hs)))
                 for hs in itertools.product((0, 1), repeat=2)]
        masks = [FrozenMap(dict(zip(locs, ps)))
                 for ps in itertools.product(perms, repeat=2)]
        vocabulary = _inversion_vocabulary()
        assert len(vocabulary) >= 200
        checked = 0
        for a in vocabulary:
            for store in stores:
                for heap in heaps:
                    for m_ev, m_red, m_si in itertools.product(masks, repeat=3):
                        ev = ViperState(store, heap, m_ev)
                        red = ViperState(store, heap, m_red)
                        si = ViperState(store, heap, m_si)
                        assert inversion_holds(vctx, a, ev, red, si), (
                            a, ev, red, si)
                        checked += 1
        elapsed = time.monotonic() - start
        assert checked == len(vocabulary) * len(stores) * len(heaps) * len(masks) ** 3
        assert elapsed <= 5 * 60, f"brute force took {elapsed:.0f}s"


# ---------------------------------------------------------------------------
# 6. Axiom satisfaction under the canonical interpretation
# ---------------------------------------------------------------------------

class TestAxiomSatisfaction:
    def test_all_axioms_hold_exhaustively(self):
        start = time.monotonic()
        _, result = pipeline(
            "field f: Int\nmethod m(x: Ref)\n{\n  inhale acc(x.f, 1/2)\n}\n")
        ctx = canonical_interpretation(result.program, DEFAULT)
        ok, violated = axioms_satisfied(ctx)
        elapsed = time.monotonic() - start
        assert ok, violated
        assert len(result.program.axioms) == 7
        assert elapsed <= 60, f"axiom check took {elapsed:.0f}s"


# ---------------------------------------------------------------------------
# 7. Per-rule soundness sampling
# ---------------------------------------------------------------------------

FARM_BOUNDS = Bounds(refs=1, int_lo=0, int_hi=1, perm_denom=2)
FARM_SEEDS = range(1, 101)


def _walk_rule_instances(src, counts, violations):
    """Count, for every rule node of an accepted-certificate tree, the
    instances whose premises pass the oracle and whose side conditions hold,
    and record any whose conclusion the oracle refutes.  Sequencing nodes are
    replayed through the obligation-carrying composition rule, and statement
    goals are additionally wrapped in a consequence application, so the two
    rules the builder never emits are sampled as well."""
    program, result = pipeline(src)
    cert = build_certificate(program, result, FARM_BOUNDS)
    bctx = canonical_interpretation(result.program, FARM_BOUNDS)
    for mcert in cert.methods:
        m = program.method(mcert.method)
        proc = next(p for p in result.program.procs if p.name == mcert.proc)
        mc = MethodContext(program, result.program, m, proc, mcert.record,
                           FARM_BOUNDS, None, bctx)
        rel = SR(mcert.record)
        root = SimulationGoal("stm", method_root_stmt(m), rel, rel,
                              ((0, 1),), _terminal_cursor(proc))
        cache = {}

        def holds(goal):
            if goal not in cache:
                cache[goal] = oracle_check(goal, mc) is None
            return cache[goal]

        def note(rule, premises_ok, sides_ok, goal):
            if premises_ok and sides_ok:
                counts[rule] += 1
                if not holds(goal):
                    violations.append((rule, mcert.method, goal))

        stack = [(root, mcert.tree)]
        while stack:
            goal, app = stack.pop()
            if app.rule == "Atomic":
                counts["Atomic"] += 1
                if not holds(goal):
                    violations.append(("Atomic", mcert.method, goal))
                continue
            children, obligations = apply_rule(goal, app, mc.rule_env)
            premises_ok = all(holds(g) for g in children)
            sides_ok = all(
                _discharge(ob, goal, mc, []) is None for ob in obligations)
            note(app.rule, premises_ok, sides_ok, goal)
            if app.rule == "SeqSim":
                comp_children, comp_obs = apply_rule(
                    goal, RuleApp("Comp", app.params), mc.rule_env)
                note("Comp",
                     all(holds(g) for g in comp_children),
                     all(_discharge(ob, goal, mc, []) is None
                         for ob in comp_obs),
                     goal)
            if goal.q is None and goal.kind == "stm" \
                    and isinstance(goal.subject, (V.Inhale, V.Exhale)):
                try:
                    (child,), cons_obs = apply_rule(
                        goal, RuleApp("Cons", (("q", Q_INH),)), mc.rule_env)
                    note("Cons", holds(child),
                         all(_discharge(ob, goal, mc, []) is None
                             for ob in cons_obs),
                         goal)
                except RuleError:
                    pass
            stack.extend(zip(children, app.children))


class TestRuleSoundness:
    def test_every_rule_has_100_valid_instances(self):
        counts: Counter = Counter()
        violations: list = []
        for seed in FARM_SEEDS:
            _walk_rule_instances(
                generate_rule_farm_program(seed), counts, violations)
        assert violations == []
        for rule in RULE_NAMES:
            assert counts[rule] >= 100, (rule, dict(counts))


# ---------------------------------------------------------------------------
# 8. Non-local dependency on the callee's specification check
# ---------------------------------------------------------------------------

class TestNonLocalDependency:
    def test_pair_accepted_with_callee_check_present(self):
        v = validate_source(NONLOCAL_PAIR, bounds=SMALL)
        assert v.accepted and v.flags == ()
        by_name = {mv.method: mv for mv in v.methods}
        assert by_name["caller"].requires == ("callee",)

    def test_removing_callee_check_flips_the_verdict(self):
        v = validate_source(
            NONLOCAL_PAIR, bounds=SMALL,
            mutations=frozenset({"method-pre-wd-omitted"}))
        assert (not v.accepted) or v.flags
        by_name = {mv.method: mv for mv in v.methods}
        assert not by_name["callee"].accepted
        assert "callee" in by_name["caller"].reason
