"""Numerics for finite real spectral triples: algebra structure, order conditions
and the Hodge property, with the Standard-Model triple as the main example."""

from .linalg import DEFAULT_TOL, MatrixSubspace, Tolerance
from .algebra import (
    AlgebraError,
    AntilinearMap,
    StarAlgebra,
    WedderburnError,
    center,
    circle,
    circle_algebra,
    commutant,
    generated_algebra,
    wedderburn,
)
from .triple import (
    ConsistencyError,
    RealSpectralTriple,
    SignTriple,
    clifford,
    decompose,
    first_order_via_decomposition,
    hodge,
    omega1,
    second_order,
    validate,
)

__version__ = "0.1.0"
