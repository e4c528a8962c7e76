from algebra.polynomial import (
    OperatorPoly,
    PositionPoly,
    adjoint,
    anticommutator,
    apply_to_polynomial,
    commutator,
    is_anti_hermitian,
    is_hermitian,
    multiply,
    nested_commutator,
    symmetry_transform,
)
from algebra.rational import I, ONE, ZERO, GaussianRational, format_fraction
from algebra.series import EpsilonSeries, as_series, bch_conjugate, bch_terms
from algebra.symmetry import SymmetryKind

__all__ = [
    "EpsilonSeries",
    "GaussianRational",
    "I",
    "ONE",
    "OperatorPoly",
    "PositionPoly",
    "SymmetryKind",
    "ZERO",
    "adjoint",
    "anticommutator",
    "apply_to_polynomial",
    "as_series",
    "bch_conjugate",
    "bch_terms",
    "commutator",
    "format_fraction",
    "is_anti_hermitian",
    "is_hermitian",
    "multiply",
    "nested_commutator",
    "symmetry_transform",
]
