"""Shared helpers for the test suite: canned bounds, pipeline shortcuts, and
a structural normalizer for comparing emitted Boogie against reference
command sequences."""

from __future__ import annotations

import re
from typing import Optional, Tuple

from vpr2bpl.common import Bounds, PairBudget
from vpr2bpl.viper.typecheck import load_program
from vpr2bpl.viper.printer import print_program
from vpr2bpl.boogie.printer import print_bprogram
from vpr2bpl.translate.emit import translate_program
from vpr2bpl.validate import build_certificate, final_verdict
from vpr2bpl.validate.check import Verdict

# Small enumeration domains used by most unit tests: one reference keeps the
# state spaces tiny while still exercising null/non-null and aliasing-free
# heap logic.
TINY = Bounds(refs=1, int_lo=-1, int_hi=1, perm_denom=2)
SMALL = Bounds(refs=2, int_lo=-1, int_hi=1, perm_denom=2)
DEFAULT = Bounds()


def pipeline(source: str, mutations: frozenset = frozenset()):
    """Parse + translate; returns (program, translation result)."""
    program = load_program(source)
    return program, translate_program(program, mutations)


def validate_source(
    source: str,
    bounds: Bounds = TINY,
    mutations: frozenset = frozenset(),
    budget: Optional[PairBudget] = None,
) -> Verdict:
    """Full pipeline: translate, certify, check, differential."""
    program, result = pipeline(source, mutations)
    cert = build_certificate(program, result, bounds)
    if budget is None:
        budget = PairBudget(bounds.max_pairs)
    return final_verdict(
        cert, print_program(program), print_bprogram(result.program), budget
    )


# ---------------------------------------------------------------------------
# Structural normalization of emitted Boogie text
# ---------------------------------------------------------------------------

_FRESH = re.compile(r"\b(tmp|WM|Hp)\d+\b")
_READ_MASK = re.compile(r"readMask\(([A-Za-z_'0-9]+), (\w+), f_(\w+)\)")
_READ_HEAP = re.compile(r"readHeap\(([A-Za-z_'0-9]+), (\w+), f_(\w+)\)")
_UPD = re.compile(
    r"(\w+) := upd(Mask|Heap)\(\1, (\w+), f_(\w+), \1\[\3,\4\] ([+-]) (.+)\);"
)
_UPD_PLAIN = re.compile(r"(\w+) := upd(Mask|Heap)\(\w+, (\w+), f_(\w+), (.+)\);")
_REAL_LIT = re.compile(r"\b(\d+)\.0\b")


def normalize_boogie_lines(text: str) -> Tuple[str, ...]:
    """Reduce emitted Boogie statements to a structural form: fresh-variable
    counters stripped, ``read``/``upd`` calls re-sugared to map syntax, real
    literals shortened, layout whitespace dropped.  Declarations are skipped;
    only commands and branch structure remain."""
    out = []
    for raw in text.splitlines():
        line = raw.strip()
        if (not line or line.startswith(("var ", "procedure", "type ", "const",
                                         "function", "axiom"))):
            continue
        line = _FRESH.sub(lambda m: m.group(1), line)
        line = _READ_MASK.sub(r"\1[\2,\3]", line)
        line = _READ_HEAP.sub(r"\1[\2,\3]", line)
        line = _UPD.sub(r"\1[\3,\4] \5= \6;", line)
        line = _UPD_PLAIN.sub(r"\1[\3,\4] := \5;", line)
        line = _REAL_LIT.sub(r"\1", line)
        out.append(line)
    return tuple(out)
