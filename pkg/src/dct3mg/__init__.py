"""Two-grid and V-cycle multigrid for linear systems in the DCT-III matrix algebra.

Coefficient matrices are ``C_m(f) = Q diag(f(x_j)) Q^T`` for an even
trigonometric polynomial ``f``; coarse operators are built from symbols,
never assembled.
"""

from .coarsening import Projector, coarse_operator, cut, cut_transpose
from .errors import ConsistencyError, Dct3mgError, FactorizationError, StructuralError, UsageError
from .operator import Dct3Operator, from_symbol
from .solver import (
    Hierarchy,
    LevelData,
    SolveOptions,
    SolveReport,
    build_hierarchy,
    make_rhs,
    richardson,
    solve,
    tgm_solve,
    vcycle_solve,
)
from .symbol import (
    CosPoly,
    Symbol,
    ZeroInfo,
    extract_psi,
    galerkin_symbol,
    multiply,
    project_zero,
    projector_poly,
    psi_step,
    strang_correct,
    sup_norm,
)

__version__ = "0.1.0"

__all__ = [
    "ConsistencyError",
    "CosPoly",
    "Dct3Operator",
    "Dct3mgError",
    "FactorizationError",
    "Hierarchy",
    "LevelData",
    "Projector",
    "SolveOptions",
    "SolveReport",
    "StructuralError",
    "Symbol",
    "UsageError",
    "ZeroInfo",
    "build_hierarchy",
    "coarse_operator",
    "cut",
    "cut_transpose",
    "extract_psi",
    "from_symbol",
    "galerkin_symbol",
    "make_rhs",
    "multiply",
    "project_zero",
    "projector_poly",
    "psi_step",
    "richardson",
    "solve",
    "strang_correct",
    "sup_norm",
    "tgm_solve",
    "vcycle_solve",
]
