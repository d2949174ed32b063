"""Certificate format and serialization.

A certificate binds one source program and its translation (both pinned by
content digest) to, per method, the translation record and a tree of rule
applications.  Rule parameters are limited to program-point cursors, variable
names, and predicate-kind tags: the checker reconstructs every goal and
obligation from the root downwards, so a certificate can steer where the
proof is cut but never what is proved.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Tuple

from ..common import Bounds, FormatError, FrozenMap
from ..translate.hints import Cursor, TranslationRecord
from ..sim import RuleApp

CERT_FORMAT = "vpr2bpl-cert-1"


def text_digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class MethodCertificate:
    method: str
    proc: str
    record: TranslationRecord
    tree: RuleApp


@dataclass(frozen=True)
class Certificate:
    source_digest: str  # sha256 of the source program text
    target_digest: str  # sha256 of the translated program text
    bounds: Bounds
    methods: Tuple[MethodCertificate, ...]

    def for_method(self, name: str) -> MethodCertificate:
        for mc in self.methods:
            if mc.method == name:
                return mc
        raise KeyError(name)


# --------------------------------------------------------------------------
# JSON serialization
# --------------------------------------------------------------------------

def _param_out(v) -> object:
    if v is None:
        return None
    if isinstance(v, str):
        return {"name": v}
    if isinstance(v, tuple):
        return {"cursor": [list(p) for p in v]}
    raise FormatError(f"unserializable rule parameter {v!r}")


def _param_in(raw) -> object:
    if raw is None:
        return None
    if isinstance(raw, dict) and "name" in raw:
        return raw["name"]
    if isinstance(raw, dict) and "cursor" in raw:
        return tuple((p[0], p[1]) for p in raw["cursor"])
    raise FormatError(f"malformed rule parameter {raw!r}")


def _tree_out(app: RuleApp) -> dict:
    return {
        "rule": app.rule,
        "params": [[k, _param_out(v)] for k, v in app.params],
        "children": [_tree_out(c) for c in app.children],
    }


def _tree_in(raw: dict) -> RuleApp:
    return RuleApp(
        rule=raw["rule"],
        params=tuple((k, _param_in(v)) for k, v in raw["params"]),
        children=tuple(_tree_in(c) for c in raw["children"]),
    )


def _record_out(rec: TranslationRecord) -> dict:
    return {
        "var": [[k, v] for k, v in sorted(rec.var.items())],
        "field": [[k, v] for k, v in sorted(rec.field.items())],
        "h": rec.h,
        "m": rec.m,
    }


def _record_in(raw: dict) -> TranslationRecord:
    return TranslationRecord(
        var=FrozenMap(dict(map(tuple, raw["var"]))),
        field=FrozenMap(dict(map(tuple, raw["field"]))),
        h=raw["h"],
        m=raw["m"],
    )


def cert_to_json(cert: Certificate) -> str:
    doc = {
        "format": CERT_FORMAT,
        "source_sha256": cert.source_digest,
        "target_sha256": cert.target_digest,
        "bounds": {
            "refs": cert.bounds.refs,
            "int_lo": cert.bounds.int_lo,
            "int_hi": cert.bounds.int_hi,
            "perm_denom": cert.bounds.perm_denom,
            "max_pairs": cert.bounds.max_pairs,
        },
        "methods": [
            {
                "method": mc.method,
                "proc": mc.proc,
                "record": _record_out(mc.record),
                "tree": _tree_out(mc.tree),
            }
            for mc in cert.methods
        ],
    }
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def cert_from_json(text: str) -> Certificate:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"malformed certificate: {exc}") from None
    if doc.get("format") != CERT_FORMAT:
        raise FormatError(
            f"unsupported certificate format: {doc.get('format')!r}"
        )
    try:
        b = doc["bounds"]
        bounds = Bounds(
            refs=b["refs"], int_lo=b["int_lo"], int_hi=b["int_hi"],
            perm_denom=b["perm_denom"], max_pairs=b["max_pairs"],
        )
        methods = tuple(
            MethodCertificate(
                m["method"], m["proc"], _record_in(m["record"]),
                _tree_in(m["tree"]),
            )
            for m in doc["methods"]
        )
        return Certificate(
            doc["source_sha256"], doc["target_sha256"], bounds, methods
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed certificate: {exc}") from None
