"""Exact even Clifford algebras and Kuga-Satake abelian varieties of rational quadratic forms."""

from .brauer import AlgebraStructure, BrauerClass, QuaternionSymbol, even_clifford_structure, hilbert_symbol, isogeny_decomposition
from .clifford import CliffordElement, trace
from .hodge import HodgeStructure2, aligned, from_parameters, from_plane, polarization_E, weil_element
from .qform import DiagonalForm, FormError, DegenerateFormError, GramForm, diagonalize, signature
from .variety import KugaSatakeReport, ks_report, verify_embedding

__version__ = "0.1.0"

__all__ = [
    "AlgebraStructure",
    "BrauerClass",
    "CliffordElement",
    "DegenerateFormError",
    "DiagonalForm",
    "FormError",
    "GramForm",
    "HodgeStructure2",
    "KugaSatakeReport",
    "QuaternionSymbol",
    "aligned",
    "diagonalize",
    "even_clifford_structure",
    "from_parameters",
    "from_plane",
    "hilbert_symbol",
    "isogeny_decomposition",
    "ks_report",
    "polarization_E",
    "signature",
    "trace",
    "verify_embedding",
    "weil_element",
]
