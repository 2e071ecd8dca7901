"""Finite sums of projections in purely infinite simple C*-algebras with torsion K0."""
from .certificate import Certificate, count_projections
from .fillmore import fillmore_decompose, fillmore_diagonal_fast, schur_horn_unit_diag
from .ktheory import KGroup, parse_group
from .strategies import SpectralElement, Verdict, check_decomposable, strat_spectral
from .verify import Report, verify_certificate

__all__ = [
    "Certificate", "KGroup", "Report", "SpectralElement", "Verdict", "check_decomposable",
    "count_projections", "fillmore_decompose", "fillmore_diagonal_fast", "parse_group",
    "schur_horn_unit_diag", "strat_spectral", "verify_certificate",
]
