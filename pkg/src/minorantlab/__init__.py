"""Numerical toolkit for alpha-concave functions on R^1 and R^2.

Function models and their masses, inner linearizations and alpha-affine
minorants with exact integration, Steiner symmetrization and symmetric
decreasing rearrangement, and the best-minorant approximation defect G.
"""

from .approx import (
    MinorantSolution,
    OptimizerConfig,
    best_minorant,
    brute_force_minorant,
    g_functional,
    macbeath_pair,
    steiner_monotonicity_check,
)
from .catalog import function_from_json, load_function
from .functional import INF, AlphaConcaveFunction, phi, phi_inv
from .hull import AlphaMinorant, alpha_minorant_from_points, inner_linearization
from .kernels import BACKEND
from .measure import MassResult, mass_affine_piece, minorant_mass, total_mass
from .symmetry import Hyperplane, rearrange, steiner_symmetrize

__version__ = "0.1.0"

__all__ = [
    "INF",
    "AlphaConcaveFunction",
    "AlphaMinorant",
    "BACKEND",
    "Hyperplane",
    "MassResult",
    "MinorantSolution",
    "OptimizerConfig",
    "alpha_minorant_from_points",
    "best_minorant",
    "brute_force_minorant",
    "function_from_json",
    "g_functional",
    "inner_linearization",
    "load_function",
    "macbeath_pair",
    "mass_affine_piece",
    "minorant_mass",
    "phi",
    "phi_inv",
    "rearrange",
    "steiner_monotonicity_check",
    "steiner_symmetrize",
    "total_mass",
]
