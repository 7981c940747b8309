"""Tactic repertoire: structural rules, rewriting, and decision procedures.

Importing this package registers every tactic with the kernel registry.
`revalidate` re-checks a recorded closure certificate; replay uses it to
confirm that each goal the trace closed really was closed for the reason
stated.
"""

from __future__ import annotations

from ..kernel import CertificateError, SolutionState, TraceStep

from . import structural, decide, linarith, ring, rewrite, auto  # noqa: F401

from .structural import (  # noqa: F401
    revalidate_cases, revalidate_exact, revalidate_rfl,
)
from .decide import revalidate_eval_decide  # noqa: F401
from .linarith import revalidate_linear_arith  # noqa: F401
from .ring import revalidate_ring_nf  # noqa: F401
from .rewrite import revalidate_rw_search  # noqa: F401
from .auto import revalidate_auto  # noqa: F401

_REVALIDATORS = {
    "exact": revalidate_exact,
    "rfl": revalidate_rfl,
    "cases": revalidate_cases,
    "eval_decide": revalidate_eval_decide,
    "linear_arith": revalidate_linear_arith,
    "ring_nf": revalidate_ring_nf,
    "rw_search": revalidate_rw_search,
    "auto": revalidate_auto,
}


def revalidate(step: TraceStep, final: SolutionState) -> None:
    cert = step.cert
    if cert is None:
        return
    fn = _REVALIDATORS.get(cert.tactic)
    if fn is None:
        raise CertificateError(
            f"no revalidator for certificate kind {cert.tactic!r}")
    fn(cert)
