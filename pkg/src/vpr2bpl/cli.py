"""Command-line front door.

Every command is a thin client of the HTTP service: requests are served by an
in-process instance of the app by default, or by a remote server when
``--server`` is given.  Flags mirror the enumeration bounds one-to-one and
every flag can be overridden by an environment variable with the ``VPR2BPL_``
prefix (e.g. ``VPR2BPL_REFS=3``).

Exit codes: 0 accepted/success, 1 rejected or refuted, 2 usage or input
errors, 3 resource-cap abort.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Optional

import httpx

from .common import EXIT_OK, EXIT_REJECTED, EXIT_RESOURCE, EXIT_USAGE

ENV_PREFIX = "VPR2BPL_"


def _env_default(flag: str, fallback):
    return os.environ.get(ENV_PREFIX + flag.upper().replace("-", "_"), fallback)


def _add_bounds_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--refs", type=int, default=_env_default("refs", 2),
                   help="number of non-null references (default 2)")
    p.add_argument("--int-range", default=_env_default("int_range", "-2:2"),
                   metavar="LO:HI", help="inclusive integer range (default -2:2)")
    p.add_argument("--perm-denom", type=int,
                   default=_env_default("perm_denom", 2),
                   help="permission denominator (default 2)")
    p.add_argument("--max-states", type=int,
                   default=_env_default("max_states", 10_000_000),
                   help="enumeration ceiling before a resource abort")


def _add_report_flag(p: argparse.ArgumentParser) -> None:
    p.add_argument("--report", choices=["text", "machine"],
                   default=_env_default("report", "text"))


def _parse_bounds(args) -> dict:
    try:
        lo, hi = args.int_range.split(":", 1)
        return {
            "refs": int(args.refs),
            "int_lo": int(lo),
            "int_hi": int(hi),
            "perm_denom": int(args.perm_denom),
            "max_pairs": int(args.max_states),
        }
    except ValueError:
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="vpr2bpl",
        description="certifying translator with bounded-exhaustive validation",
    )
    top.add_argument("--server", default=_env_default("server", None),
                     help="URL of a running service (default: in-process)")
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("translate", help="translate a program")
    p.add_argument("input", type=Path)
    p.add_argument("-o", "--output", type=Path, default=None)
    p.add_argument("--hints", type=Path, default=None)

    p = sub.add_parser("interpret", help="exhaustive source outcome summary")
    p.add_argument("input", type=Path)
    _add_bounds_flags(p)
    _add_report_flag(p)

    p = sub.add_parser("run-boogie", help="exhaustive target outcome summary")
    p.add_argument("input", type=Path)
    _add_bounds_flags(p)
    _add_report_flag(p)

    p = sub.add_parser("validate", help="translate, certify, and check")
    p.add_argument("input", type=Path)
    p.add_argument("-o", "--output", type=Path, default=None)
    p.add_argument("--hints", type=Path, default=None)
    p.add_argument("--cert", type=Path, default=None)
    p.add_argument("--jobs", type=int, default=_env_default("jobs", 1))
    _add_bounds_flags(p)
    _add_report_flag(p)

    p = sub.add_parser("check-cert", help="check an existing certificate")
    p.add_argument("cert", type=Path)
    p.add_argument("source", type=Path)
    p.add_argument("target", type=Path)
    _add_report_flag(p)

    p = sub.add_parser("oracle", help="certificate-free differential check")
    p.add_argument("input", type=Path)
    _add_bounds_flags(p)
    _add_report_flag(p)
    return top


def _client(server: Optional[str]) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=None)
    # In-process mode mounts the service app directly; TestClient drives the
    # ASGI app synchronously without a listening socket.
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        from starlette.testclient import TestClient

    from .service import app  # imported lazily: keeps --help fast

    return TestClient(app, raise_server_exceptions=False)


def _post(client: httpx.Client, path: str, payload: dict) -> dict:
    resp = client.post(path, json=payload)
    if resp.status_code == 422:
        detail = resp.json().get("detail", {})
        if isinstance(detail, dict) and detail.get("kind") == "resource":
            print(f"resource limit: {detail.get('message')}", file=sys.stderr)
            raise SystemExit(EXIT_RESOURCE)
        msg = detail.get("message", detail) if isinstance(detail, dict) else detail
        print(f"error: {msg}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)
    resp.raise_for_status()
    return resp.json()


def _read(path: Path) -> str:
    try:
        return path.read_text()
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _emit(doc: dict, report: str, text_lines) -> None:
    if report == "machine":
        print(json.dumps(doc, indent=2))
    else:
        for line in text_lines:
            print(line)


def _verdict_lines(v: dict):
    yield f"verdict: {'Accepted' if v['accepted'] else 'Rejected'}"
    for m in v["methods"]:
        status = "accepted" if m["accepted"] else "REJECTED"
        line = f"  {m['method']:24s} {status}"
        if m["reason"]:
            line += f"  ({m['reason']})"
        yield line
    for f in v["flags"]:
        yield f"  soundness flag: {f}"
    if v["reason"] and not v["methods"]:
        yield f"  {v['reason']}"
    yield f"  note: {v['note']}"


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    # Join "--int-range -2:2" into one token so argparse does not mistake the
    # negative lower bound for a flag.
    for i, a in enumerate(argv[:-1]):
        if a == "--int-range":
            argv[i:i + 2] = [f"--int-range={argv[i + 1]}"]
            break
    args = build_parser().parse_args(argv)
    with _client(args.server) as client:
        if args.command == "translate":
            doc = _post(client, "/translate", {"source": _read(args.input)})
            if args.output:
                args.output.write_text(doc["target"])
            else:
                print(doc["target"], end="")
            if args.hints:
                args.hints.write_text(doc["hints"])
            return EXIT_OK

        bounds = _parse_bounds(args) if hasattr(args, "refs") else None

        if args.command == "interpret":
            doc = _post(client, "/interpret",
                        {"source": _read(args.input), "bounds": bounds})
            _emit(doc, args.report, (
                f"  {m['method']:24s} normal-states={m['normal_states']}"
                f" can-fail={m['can_fail']} can-stop={m['can_stop']}"
                for m in doc["methods"]
            ))
            return EXIT_OK

        if args.command == "run-boogie":
            doc = _post(client, "/run-boogie",
                        {"target": _read(args.input), "bounds": bounds})
            _emit(doc, args.report, (
                f"  {p['proc']:24s} correct={p['correct']}"
                + (f" witness={p['witness']}" if p["witness"] else "")
                for p in doc["procs"]
            ))
            return EXIT_OK

        if args.command == "validate":
            doc = _post(client, "/validate", {
                "source": _read(args.input), "bounds": bounds,
                "jobs": int(args.jobs),
            })
            if args.output:
                args.output.write_text(doc["target"])
            if args.hints:
                args.hints.write_text(doc["hints"])
            if args.cert:
                args.cert.write_text(doc["certificate"])
            _emit(doc["verdict"], args.report,
                  _verdict_lines(doc["verdict"]))
            return EXIT_OK if doc["verdict"]["accepted"] else EXIT_REJECTED

        if args.command == "check-cert":
            doc = _post(client, "/check-cert", {
                "source": _read(args.source),
                "target": _read(args.target),
                "certificate": _read(args.cert),
            })
            _emit(doc["verdict"], args.report,
                  _verdict_lines(doc["verdict"]))
            return EXIT_OK if doc["verdict"]["accepted"] else EXIT_REJECTED

        if args.command == "oracle":
            doc = _post(client, "/oracle",
                        {"source": _read(args.input), "bounds": bounds})
            _emit(doc, args.report, (
                f"  {m['method']:24s} proc-correct={m['proc_correct']}"
                f" method-correct={m['method_correct']}"
                f" spec-well-formed={m['spec_well_formed']}"
                + (f" DISCREPANCY: {m['discrepancy']}" if m["discrepancy"] else "")
                for m in doc["methods"]
            ))
            return EXIT_OK if doc["ok"] else EXIT_REJECTED

    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
