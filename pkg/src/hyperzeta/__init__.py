"""hyperzeta: zeta functions of hyperelliptic curves over F_{p^n} (p odd)
by one-parameter p-adic deformation.

The pipeline deforms the input curve y^2 = Q1(x) to a prime-field curve
y^2 = Q0(x), solves the resulting matrix differential equation for the
Frobenius matrix with a streaming, memory-lean recursion, specializes at
the curve, and lifts det(1 - F t) to an integer polynomial validated
against the Weil constraints and (at desk scale) exhaustive point counts.
"""

from .padic import (
    PadicContext,
    ZqElement,
    ScaledElement,
    make_context,
    invert,
    frobenius,
    teichmuller,
    valuation,
)
from .odesolver import (
    MatPoly,
    ScaledMatrix,
    DiffEqSystem,
    SolveStats,
    assemble_system,
    step_recursion,
    solve_full,
    solve_streaming,
    solve_multipoint,
)
from .deformation import (
    Family,
    DeformationConstants,
    build_family,
    resultant,
    bezout_cofactors,
    reduce_differential,
    connection_matrix,
    constants,
    to_diffeq_system,
)
from .kedlaya_fiber import FiberFrobenius, fiber_frobenius_matrix, frobenius_inverse_sqrt_series
from .zeta import (
    ZetaResult,
    specialize_frobenius,
    norm_frobenius,
    charpoly_lift,
    assemble_zeta,
    compute_zeta,
)
from .oracle import SmallField, count_points, rational_recursion_replay
from . import errors

__version__ = "0.1.0"

__all__ = [
    "PadicContext",
    "ZqElement",
    "ScaledElement",
    "make_context",
    "invert",
    "frobenius",
    "teichmuller",
    "valuation",
    "MatPoly",
    "ScaledMatrix",
    "DiffEqSystem",
    "SolveStats",
    "assemble_system",
    "step_recursion",
    "solve_full",
    "solve_streaming",
    "solve_multipoint",
    "Family",
    "DeformationConstants",
    "build_family",
    "resultant",
    "bezout_cofactors",
    "reduce_differential",
    "connection_matrix",
    "constants",
    "to_diffeq_system",
    "FiberFrobenius",
    "fiber_frobenius_matrix",
    "frobenius_inverse_sqrt_series",
    "ZetaResult",
    "specialize_frobenius",
    "norm_frobenius",
    "charpoly_lift",
    "assemble_zeta",
    "compute_zeta",
    "SmallField",
    "count_points",
    "rational_recursion_replay",
    "errors",
]
