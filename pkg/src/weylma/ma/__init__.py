"""Monge-Ampere solvers: rank-one quadrature and rank-two grid schemes."""

from .rank1 import RadialProfile, solve_rank1
from .rank2 import ProblemSpec, Solution, solve_rank2
from .rhs import f1_hat, f2_hat, normalized_rhs, ricci_flat_residual
from .verify import (
    chamber_preservation,
    equation_residual,
    inner_residual,
    min_convexity,
    solve,
    wall_symmetry,
)

__all__ = [
    "ProblemSpec",
    "RadialProfile",
    "Solution",
    "chamber_preservation",
    "equation_residual",
    "f1_hat",
    "f2_hat",
    "inner_residual",
    "min_convexity",
    "normalized_rhs",
    "ricci_flat_residual",
    "solve",
    "solve_rank1",
    "solve_rank2",
    "wall_symmetry",
]
