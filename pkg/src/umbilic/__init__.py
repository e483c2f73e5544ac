"""Exact computations with the umbilical tensor of real hypersurfaces in C^2."""
from .algebra import GaussianRational, Poly, PolyParseError, Var
from .operators import (
    SPHERE,
    DefiningFunction,
    PolyMatrix,
    build_A,
    build_D,
    field_L,
    field_Lbar,
    poly_det,
    reduce_mod,
)
from .topology import SampledLoop, UnivariatePoly, count_roots_in_unit_disk, winding_number

__all__ = [
    "GaussianRational",
    "Poly",
    "PolyParseError",
    "Var",
    "SPHERE",
    "DefiningFunction",
    "PolyMatrix",
    "build_A",
    "build_D",
    "field_L",
    "field_Lbar",
    "poly_det",
    "reduce_mod",
    "SampledLoop",
    "UnivariatePoly",
    "count_roots_in_unit_disk",
    "winding_number",
]

__version__ = "0.1.0"
