"""Labelled sequent calculi, Kripke semantics and canonical models for Ldm/Tstit."""

from .formula import ParseError, complement, parse, render, to_nnf
from .model import ExplicitModel, LayeredModel, check_frame, generate_model, satisfies
from .prover import Proved, Refuted, SearchBudget, Unknown, prove
from .sequent import ProofTree, appendix_b_fixture, check_proof

__all__ = [
    "ExplicitModel",
    "LayeredModel",
    "ParseError",
    "ProofTree",
    "Proved",
    "Refuted",
    "SearchBudget",
    "Unknown",
    "appendix_b_fixture",
    "check_frame",
    "check_proof",
    "complement",
    "generate_model",
    "parse",
    "prove",
    "render",
    "satisfies",
    "to_nnf",
]
