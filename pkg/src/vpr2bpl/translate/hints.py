"""Structured hints describing how each source construct was encoded.

The emitter produces, per method, a :class:`TranslationRecord` (which Boogie
variables and constants stand for which source variables, heap, mask and
fields) and a tree of :class:`HintNode` mirroring the statement/assertion
structure.  Each node carries the cursor span of its emitted commands,
which-encoding variant tags, and the fresh variables it introduced with their
roles.  The sidecar file is JSON with fixed key order and an explicit format
version, so golden tests can compare it byte-exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Tuple

from ..common import FormatError, FrozenMap

HINTS_FORMAT = "vpr2bpl-hints-1"

# Variant tags
WD_CHECKED = "wd-checks-included"
WD_OMITTED = "wd-checks-omitted"
SELECT_EMITTED = "nondet-select-emitted"
SELECT_OMITTED = "nondet-select-omitted"

# Binding roles
ROLE_TEMP_PERM = "temp-perm"
ROLE_EVAL_MASK = "eval-mask"
ROLE_EVAL_HEAP = "eval-heap"
ROLE_HAVOC_TARGET = "havoc-target"
ROLE_SCOPED_VAR = "scoped-var"

Cursor = Tuple[Tuple[object, object], ...]


@dataclass(frozen=True)
class VariantHint:
    tag: str


@dataclass(frozen=True)
class BindingHint:
    role: str
    name: str


@dataclass(frozen=True)
class CursorHint:
    start: Cursor
    end: Cursor


@dataclass(frozen=True)
class HintNode:
    """One node of the per-method hint tree.

    ``label`` identifies the source construct ("inhale", "acc", "seq", ...);
    ``span`` delimits the emitted commands; ``variants`` and ``bindings``
    record encoding choices and fresh variables; ``children`` mirror the
    source sub-structure in order."""

    label: str
    span: CursorHint
    variants: Tuple[VariantHint, ...] = ()
    bindings: Tuple[BindingHint, ...] = ()
    children: Tuple["HintNode", ...] = ()

    def binding(self, role: str) -> Optional[str]:
        for b in self.bindings:
            if b.role == role:
                return b.name
        return None

    def has_variant(self, tag: str) -> bool:
        return any(v.tag == tag for v in self.variants)


@dataclass(frozen=True)
class TranslationRecord:
    """Which Boogie entities represent which source components."""

    var: FrozenMap  # source variable -> Boogie variable
    field: FrozenMap  # source field -> Boogie constant
    h: str = "H"
    m: str = "M"
    h0: Optional[str] = None  # evaluation-state heap, when distinct from h
    m0: Optional[str] = None  # evaluation-state mask, when distinct from m

    def __post_init__(self):
        names = list(self.var.values())
        if len(set(names)) != len(names):
            raise FormatError("variable mapping is not injective")
        special = [x for x in (self.h, self.m, self.h0, self.m0) if x is not None]
        if len(set(special)) != len(special):
            raise FormatError("heap/mask variables must be pairwise distinct")

    def with_eval_mask(self, m0: str) -> "TranslationRecord":
        return TranslationRecord(self.var, self.field, self.h, self.m,
                                 self.h0, m0)


@dataclass(frozen=True)
class MethodTranslation:
    method: str
    proc: str
    record: TranslationRecord
    hints: HintNode


@dataclass(frozen=True)
class TranslationResult:
    program: object  # BProgram
    methods: Tuple[MethodTranslation, ...]

    def for_method(self, name: str) -> MethodTranslation:
        for mt in self.methods:
            if mt.method == name:
                return mt
        raise KeyError(name)


# --------------------------------------------------------------------------
# Serialization
# --------------------------------------------------------------------------

def _cursor_out(c: Cursor) -> list:
    return [list(pair) for pair in c]


def _cursor_in(raw) -> Cursor:
    return tuple((p[0], p[1]) for p in raw)


def _node_out(n: HintNode) -> dict:
    return {
        "label": n.label,
        "start": _cursor_out(n.span.start),
        "end": _cursor_out(n.span.end),
        "variants": [v.tag for v in n.variants],
        "bindings": [[b.role, b.name] for b in n.bindings],
        "children": [_node_out(c) for c in n.children],
    }


def _node_in(raw: dict) -> HintNode:
    return HintNode(
        label=raw["label"],
        span=CursorHint(_cursor_in(raw["start"]), _cursor_in(raw["end"])),
        variants=tuple(VariantHint(t) for t in raw["variants"]),
        bindings=tuple(BindingHint(r, n) for r, n in raw["bindings"]),
        children=tuple(_node_in(c) for c in raw["children"]),
    )


def hints_to_json(methods: Tuple[MethodTranslation, ...]) -> str:
    doc = {
        "format": HINTS_FORMAT,
        "methods": [
            {
                "method": mt.method,
                "proc": mt.proc,
                "record": {
                    "var": [[k, v] for k, v in sorted(mt.record.var.items())],
                    "field": [[k, v] for k, v in sorted(mt.record.field.items())],
                    "h": mt.record.h,
                    "m": mt.record.m,
                },
                "hints": _node_out(mt.hints),
            }
            for mt in methods
        ],
    }
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def hints_from_json(text: str) -> Tuple[MethodTranslation, ...]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"malformed hints file: {exc}") from None
    if doc.get("format") != HINTS_FORMAT:
        raise FormatError(f"unsupported hints format: {doc.get('format')!r}")
    out = []
    try:
        for m in doc["methods"]:
            rec = TranslationRecord(
                var=FrozenMap(dict(map(tuple, m["record"]["var"]))),
                field=FrozenMap(dict(map(tuple, m["record"]["field"]))),
                h=m["record"]["h"],
                m=m["record"]["m"],
            )
            out.append(MethodTranslation(
                m["method"], m["proc"], rec, _node_in(m["hints"]),
            ))
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed hints file: {exc}") from None
    return tuple(out)
