"""Exact and numeric toolkit for the conjugation action on n x n matrices:
adjoint polynomial vector fields, bracket-generation checks, derivation
kernel growth, and spectral-ball automorphism flows."""

from .polyring import (
    DimensionMismatch,
    HomSliceBasis,
    Monomial,
    Polynomial,
    PolyParseError,
    enumerate_slice,
    format_poly,
    parse_poly,
    substitute_trace,
)
from .adjointfields import (
    GeneratorId,
    InvalidGenerator,
    OvershearClass,
    Theta,
    VectorField,
    Xi,
    bracket,
    divergence,
    emit_tables,
    generator_field,
    generator_ids,
    make_theta,
    make_xi,
    overshear_class,
    scale_field,
)

__version__ = "0.1.0"

__all__ = [
    "DimensionMismatch", "HomSliceBasis", "Monomial", "Polynomial",
    "PolyParseError", "enumerate_slice", "format_poly", "parse_poly",
    "substitute_trace",
    "GeneratorId", "InvalidGenerator", "OvershearClass", "Theta",
    "VectorField", "Xi", "bracket", "divergence", "emit_tables",
    "generator_field", "generator_ids", "make_theta", "make_xi",
    "overshear_class", "scale_field",
    "__version__",
]
