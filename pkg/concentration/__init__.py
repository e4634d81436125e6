"""Concentration of sums of geometric-tailed variables, with an exact oracle."""

from .lemma import (
    CertificationReport,
    LemmaParams,
    MgfSlack,
    TailSpec,
    certify,
    choose_params,
    exact_tail,
    geometric_spec,
    mgf_chain_check,
    mu,
)

__all__ = [
    "TailSpec",
    "LemmaParams",
    "MgfSlack",
    "CertificationReport",
    "mu",
    "choose_params",
    "mgf_chain_check",
    "exact_tail",
    "geometric_spec",
    "certify",
]
