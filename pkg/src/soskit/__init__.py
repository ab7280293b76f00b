"""Exact membership tests for sparse sum-of-squares cones and their duals."""

from .certificates import DualWitness, SosCertificate, verify_certificate, verify_witness
from .forms import Form, fischer_inner, fischer_norm_sq, from_raw_terms, index_set, monomial, variable
from .moment import dual_membership, moment_matrix, pair_with_square
from .solver import MembershipVerdict, SolverOptions, Status, membership

__all__ = [
    "DualWitness",
    "Form",
    "MembershipVerdict",
    "SolverOptions",
    "SosCertificate",
    "Status",
    "dual_membership",
    "fischer_inner",
    "fischer_norm_sq",
    "from_raw_terms",
    "index_set",
    "membership",
    "moment_matrix",
    "monomial",
    "pair_with_square",
    "variable",
    "verify_certificate",
    "verify_witness",
]
