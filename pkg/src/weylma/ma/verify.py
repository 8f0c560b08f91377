"""Solve dispatch and residual/diagnostic maps for solver output."""

from __future__ import annotations

import numpy as np

from ..potentials import GridPotential
from ..rootsys import RootSystem
from .rank1 import RadialProfile, rank1_data, solve_rank1
from .rank2 import ProblemSpec, Solution, inner_mask, solve_rank2
from .rhs import f2_hat
from .schemes import CentredOperator

__all__ = [
    "solve",
    "solution_from_profile",
    "equation_residual",
    "inner_residual",
    "inner_derivatives",
    "inner_nodes",
    "chamber_preservation",
    "min_convexity",
    "wall_symmetry",
]


def solution_from_profile(spec: ProblemSpec, profile: RadialProfile) -> Solution:
    """Wrap a rank-one profile (solved or closed form) as a :class:`Solution`."""
    res = float(np.abs(_rank1_residual(profile)[1:]).max() / max(1.0, np.abs(f2_hat(spec.rs, spec.c, profile.x[-1:, None])).max()))
    return Solution(
        spec=spec,
        points=profile.x[:, None].copy(),
        values=profile.values.copy(),
        iterations=0,
        final_residual=res,
        converged=True,
        meta={"h": float(profile.x[1] - profile.x[0]), "lattice": "interval", "nodes": len(profile.x)},
        profile=profile,
    )


def solve(spec: ProblemSpec) -> Solution:
    """Rank one: quadrature profile on ``[0, R]`` with ``grid_n`` nodes.
    Rank two: :func:`~weylma.ma.rank2.solve_rank2`."""
    if spec.rs.rank == 1:
        return solution_from_profile(spec, solve_rank1(spec.rs, spec.c, spec.R, spec.grid_n))
    return solve_rank2(spec)


def _rank1_residual(profile: RadialProfile) -> np.ndarray:
    a, m, _, log_p = rank1_data(profile.rs)
    x = profile.x
    lhs = np.exp(log_p) * np.prod(np.multiply.outer(profile.d1, np.ones_like(a)) ** m, axis=1) * profile.d2
    rhs = profile.c * np.prod(np.sinh(2 * np.multiply.outer(x, a)) ** m, axis=1)
    return lhs - rhs


def equation_residual(sol: Solution) -> np.ndarray:
    """Pointwise ``LHS - RHS`` of the raw Ricci-flat equation on the unknown nodes.

    Rank two uses the centred second differences the solver discretises;
    rank one uses the profile's nodal derivatives.
    """
    if sol.rank == 1:
        return _rank1_residual(sol.profile)
    op = CentredOperator(sol.lattice(), sol.spec.rs, sol.spec.c)
    return op.raw_residual(sol.values_full)


def inner_nodes(sol: Solution) -> np.ndarray:
    """Mask of inner-region nodes: |Z| <= R/2 and at least 2h from the walls."""
    h = sol.meta.get("h", sol.spec.h)
    if sol.rank == 1:
        x = sol.points[:, 0]
        return (x >= 2 * h - 1e-12) & (x <= sol.spec.R / 2 + 1e-12)
    return inner_mask(sol.spec.rs, sol.points, sol.spec.R, h)


def inner_residual(sol: Solution) -> tuple[float, float]:
    """``(max |residual|, max F2)`` over the inner region."""
    mask = inner_nodes(sol)
    res = equation_residual(sol)[mask]
    f2 = f2_hat(sol.spec.rs, sol.spec.c, sol.points[mask])
    return float(np.abs(res).max()), float(f2.max())


def inner_derivatives(sol: Solution, order: int = 4):
    """``(Z, grad, hess)`` on inner nodes off the walls."""
    mask = inner_nodes(sol)
    if sol.rank == 1:
        p = sol.profile
        Z = sol.points[mask]
        return Z, p.d1[mask, None], p.d2[mask, None, None]
    gp = GridPotential(sol.lattice(), sol.values_full, sol.spec.rs, order=order)
    return sol.points[mask], gp.nodal_grad()[mask], gp.nodal_hess()[mask]


def chamber_preservation(sol: Solution, region: str = "inner") -> tuple[bool, float]:
    """Whether ``lambda(grad u) > 0`` for every positive root at chamber-interior nodes.

    Returns the flag and the smallest ``lambda(grad u)`` seen.
    """
    rs: RootSystem = sol.spec.rs
    if sol.rank == 1:
        Z, g, _ = inner_derivatives(sol)
    else:
        gp = GridPotential(sol.lattice(), sol.values_full, rs, order=2)
        g = gp.nodal_grad()
        Z = sol.points
        mask = inner_nodes(sol) if region == "inner" else np.ones(len(Z), bool)
        off = np.all(rs.evaluate(Z) > 1e-9 * sol.spec.h, axis=1)
        g, Z = g[mask & off], Z[mask & off]
    lam = g @ rs.roots.T
    low = float(lam.min())
    return low > 0, low


def min_convexity(sol: Solution) -> float:
    """Smallest eigenvalue of the centred Hessian over the inner region."""
    _, _, H = inner_derivatives(sol, order=2)
    return float(np.linalg.eigvalsh(H).min())


def wall_symmetry(sol: Solution) -> float:
    """Largest normal derivative ``|lambda(grad u)|`` at wall nodes (zero for
    an exactly W-invariant extension)."""
    rs = sol.spec.rs
    if sol.rank == 1:
        return float(abs(sol.profile.d1[0]))
    gp = GridPotential(sol.lattice(), sol.values_full, rs, order=2)
    g = gp.nodal_grad()
    lamZ = rs.evaluate(sol.points)
    wall = np.abs(lamZ) <= 1e-9 * sol.spec.h
    lam_g = g @ rs.roots.T
    return float(np.abs(lam_g[wall]).max(initial=0.0))
