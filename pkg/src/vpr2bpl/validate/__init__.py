"""Certificate construction, checking, and the validation verdict."""

from .certificate import (
    CERT_FORMAT,
    Certificate,
    MethodCertificate,
    cert_from_json,
    cert_to_json,
    text_digest,
)
from .build import build_certificate, build_method_certificate
from .check import (
    MethodVerdict,
    Verdict,
    check_certificate,
    check_method_certificate,
    check_rel_method_proc,
    final_verdict,
)
from .oracle import Counterexample, MethodContext, oracle_check

__all__ = [
    "CERT_FORMAT", "Certificate", "MethodCertificate", "cert_from_json",
    "cert_to_json", "text_digest", "build_certificate",
    "build_method_certificate", "MethodVerdict", "Verdict",
    "check_certificate", "check_method_certificate", "check_rel_method_proc",
    "final_verdict", "Counterexample", "MethodContext", "oracle_check",
]
