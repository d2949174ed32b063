"""HTTP service exposing translation, interpretation, and validation.

The service is stateless: every request carries the program text(s) and the
enumeration bounds, and responses embed all produced artifacts (translated
program, hints, certificate, verdict) as text so the caller owns persistence.
The command-line client mounts this app in-process by default, so the same
code path serves both local and remote use.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from typing import List, Optional, Tuple

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from .common import (
    Bounds, EXIT_REJECTED, EXIT_RESOURCE, EXIT_USAGE,
    ResourceLimitError, PairBudget, Vpr2BplError,
)
from .viper.typecheck import load_program
from .viper.printer import print_program
from .viper.eval import make_ctx
from .viper.semantics import (
    exec_stmt, method_correct, method_root_stmt, spec_well_formed,
    initial_states,
)
from .viper.state import FAILURE, MAGIC, Normal
from .boogie.parser import parse_bprogram
from .boogie.printer import print_bprogram
from .boogie.interp import canonical_interpretation
from .boogie.semantics import proc_correct
from .translate.emit import translate_program
from .translate.hints import hints_to_json
from .validate import (
    build_certificate, cert_from_json, cert_to_json,
    check_rel_method_proc, final_verdict,
)
from .validate.check import (
    MethodVerdict, Verdict, add_differential_flags, combine_method_verdicts,
)


class BoundsModel(BaseModel):
    refs: int = 2
    int_lo: int = -2
    int_hi: int = 2
    perm_denom: int = 2
    max_pairs: int = 10_000_000

    def to_bounds(self) -> Bounds:
        if self.refs < 1 or self.perm_denom < 1 or self.int_lo > self.int_hi:
            raise HTTPException(422, detail={
                "kind": "usage", "message": "bounds must be positive and ordered",
            })
        return Bounds(self.refs, self.int_lo, self.int_hi,
                      self.perm_denom, self.max_pairs)


class MethodVerdictModel(BaseModel):
    method: str
    accepted: bool
    reason: str = ""
    requires: List[str] = Field(default_factory=list)


class VerdictModel(BaseModel):
    accepted: bool
    reason: str = ""
    methods: List[MethodVerdictModel] = Field(default_factory=list)
    flags: List[str] = Field(default_factory=list)
    note: str = (
        "verdicts are claims about the bounded state universe only"
    )

    @classmethod
    def from_verdict(cls, v: Verdict) -> "VerdictModel":
        return cls(
            accepted=v.accepted,
            reason=v.reason,
            methods=[
                MethodVerdictModel(
                    method=m.method, accepted=m.accepted, reason=m.reason,
                    requires=list(m.requires),
                )
                for m in v.methods
            ],
            flags=list(v.flags),
        )


class TranslateRequest(BaseModel):
    source: str


class TranslateResponse(BaseModel):
    source: str  # canonical re-print, the text certificates hash
    target: str
    hints: str


class InterpretRequest(BaseModel):
    source: str
    bounds: BoundsModel = BoundsModel()


class MethodSummary(BaseModel):
    method: str
    normal_states: int
    can_fail: bool
    can_stop: bool  # some execution is pruned by an assumption


class InterpretResponse(BaseModel):
    methods: List[MethodSummary]


class RunBoogieRequest(BaseModel):
    target: str
    bounds: BoundsModel = BoundsModel()


class ProcSummary(BaseModel):
    proc: str
    correct: bool
    witness: Optional[str] = None


class RunBoogieResponse(BaseModel):
    procs: List[ProcSummary]


class ValidateRequest(BaseModel):
    source: str
    bounds: BoundsModel = BoundsModel()
    jobs: int = 1


class ValidateResponse(BaseModel):
    source: str
    target: str
    hints: str
    certificate: str
    verdict: VerdictModel


class CheckCertRequest(BaseModel):
    source: str
    target: str
    certificate: str


class CheckCertResponse(BaseModel):
    verdict: VerdictModel


class OracleRequest(BaseModel):
    source: str
    bounds: BoundsModel = BoundsModel()


class OracleMethodResult(BaseModel):
    method: str
    proc_correct: bool
    method_correct: bool
    spec_well_formed: bool
    discrepancy: Optional[str] = None


class OracleResponse(BaseModel):
    ok: bool
    methods: List[OracleMethodResult]


app = FastAPI(title="vpr2bpl", version="1.0")


def _guard(fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except ResourceLimitError as exc:
        raise HTTPException(422, detail={
            "kind": "resource", "message": str(exc),
        }) from None
    except Vpr2BplError as exc:
        raise HTTPException(422, detail={
            "kind": "input", "message": str(exc),
        }) from None


def _translate(source: str) -> TranslateResponse:
    program = load_program(source)
    result = translate_program(program)
    return TranslateResponse(
        source=print_program(program),
        target=print_bprogram(result.program),
        hints=hints_to_json(result.methods),
    )


@app.post("/translate", response_model=TranslateResponse)
def translate(req: TranslateRequest) -> TranslateResponse:
    return _guard(_translate, req.source)


def _interpret(source: str, bounds: Bounds) -> InterpretResponse:
    program = load_program(source)
    budget = PairBudget(bounds.max_pairs)
    out = []
    for m in program.methods:
        ctx = make_ctx(program, m)
        root = method_root_stmt(m)
        normal, fail, magic = set(), False, False
        for init in initial_states(program, m, bounds):
            for o in exec_stmt(ctx, root, init, bounds, budget):
                if isinstance(o, Normal):
                    normal.add(o.state)
                elif o is FAILURE:
                    fail = True
                elif o is MAGIC:
                    magic = True
        out.append(MethodSummary(
            method=m.name, normal_states=len(normal),
            can_fail=fail, can_stop=magic,
        ))
    return InterpretResponse(methods=out)


@app.post("/interpret", response_model=InterpretResponse)
def interpret(req: InterpretRequest) -> InterpretResponse:
    return _guard(_interpret, req.source, req.bounds.to_bounds())


def _run_boogie(target: str, bounds: Bounds) -> RunBoogieResponse:
    bprogram = parse_bprogram(target)
    bctx = canonical_interpretation(bprogram, bounds)
    budget = PairBudget(bounds.max_pairs)
    out = []
    for proc in bprogram.procs:
        ok, wit = proc_correct(bctx, proc, budget)
        out.append(ProcSummary(
            proc=proc.name, correct=ok,
            witness=None if wit is None else repr(dict(wit)),
        ))
    return RunBoogieResponse(procs=out)


@app.post("/run-boogie", response_model=RunBoogieResponse)
def run_boogie(req: RunBoogieRequest) -> RunBoogieResponse:
    return _guard(_run_boogie, req.target, req.bounds.to_bounds())


def _check_method_worker(args: Tuple[str, str, str, str]) -> Tuple[str, bool, str, Tuple[str, ...]]:
    """Picklable per-method worker for parallel validation."""
    source, target, cert_json, method = args
    from .validate import check_method_certificate
    cert = cert_from_json(cert_json)
    program = load_program(source)
    bprogram = parse_bprogram(target)
    mv = check_method_certificate(
        program, bprogram, cert.for_method(method), cert.bounds,
        PairBudget(cert.bounds.max_pairs),
    )
    return mv.method, mv.accepted, mv.reason, mv.requires


def _validate(source: str, bounds: Bounds, jobs: int) -> ValidateResponse:
    program = load_program(source)
    result = translate_program(program)
    cert = build_certificate(program, result, bounds)
    src_text = print_program(program)
    tgt_text = print_bprogram(result.program)
    cert_json = cert_to_json(cert)
    if jobs > 1 and len(cert.methods) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_check_method_worker, [
                (src_text, tgt_text, cert_json, mc.method)
                for mc in cert.methods
            ]))
        results = tuple(
            MethodVerdict(method, accepted, reason, requires=requires)
            for method, accepted, reason, requires in rows
        )
        verdict = add_differential_flags(
            cert, src_text, tgt_text, combine_method_verdicts(results),
            PairBudget(bounds.max_pairs),
        )
    else:
        verdict = final_verdict(
            cert, src_text, tgt_text, PairBudget(bounds.max_pairs)
        )
    return ValidateResponse(
        source=src_text, target=tgt_text,
        hints=hints_to_json(result.methods),
        certificate=cert_json,
        verdict=VerdictModel.from_verdict(verdict),
    )


@app.post("/validate", response_model=ValidateResponse)
def validate(req: ValidateRequest) -> ValidateResponse:
    return _guard(_validate, req.source, req.bounds.to_bounds(), req.jobs)


def _check_cert(source: str, target: str, cert_json: str) -> CheckCertResponse:
    cert = cert_from_json(cert_json)
    verdict = final_verdict(
        cert, source, target, PairBudget(cert.bounds.max_pairs)
    )
    return CheckCertResponse(verdict=VerdictModel.from_verdict(verdict))


@app.post("/check-cert", response_model=CheckCertResponse)
def check_cert(req: CheckCertRequest) -> CheckCertResponse:
    return _guard(_check_cert, req.source, req.target, req.certificate)


def _oracle(source: str, bounds: Bounds) -> OracleResponse:
    program = load_program(source)
    result = translate_program(program)
    bctx = canonical_interpretation(result.program, bounds)
    budget = PairBudget(bounds.max_pairs)
    procs = {p.name: p for p in result.program.procs}
    rows = []
    ok = True
    for mt in result.methods:
        m = program.method(mt.method)
        proc = procs[mt.proc]
        pc, _ = proc_correct(bctx, proc, budget)
        sw, _ = spec_well_formed(program, m, bounds, budget)
        mc, _ = method_correct(program, m, bounds, budget)
        _, why = check_rel_method_proc(
            program, m, result.program, proc, bounds, budget, bctx
        )
        if why is not None:
            ok = False
        rows.append(OracleMethodResult(
            method=m.name, proc_correct=pc, method_correct=mc,
            spec_well_formed=sw, discrepancy=why,
        ))
    return OracleResponse(ok=ok, methods=rows)


@app.post("/oracle", response_model=OracleResponse)
def oracle(req: OracleRequest) -> OracleResponse:
    return _guard(_oracle, req.source, req.bounds.to_bounds())
