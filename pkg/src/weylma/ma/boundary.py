"""Dirichlet data on the truncation arc from a fitted cosh surrogate.

The surrogate ``sum kappa (cosh(beta lambda(Z)) - 1)`` carries one
``kappa`` per W-orbit of roots and a shared rate ``beta``.  They are fitted
so the log-residual of the normalised equation is as small as possible (in
least squares) on the arc ``|Z| = R``.  For a1xa1 with unit multiplicities
the fit is exact: ``kappa = c^(1/4)``, ``beta = 1``.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import least_squares

from ..potentials import CoshSurrogate
from ..rootsys import RootSystem
from .rhs import normalized_rhs

__all__ = ["fit_surrogate", "surrogate_log_residual"]


def surrogate_log_residual(pot: CoshSurrogate, Z) -> np.ndarray:
    """Log-residual of the normalised equation for an analytic potential."""
    rs = pot.rs
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    g, H = pot.grad(Z), pot.hess(Z)
    lamZ = rs.evaluate(Z)
    wall = np.abs(lamZ) <= 1e-12
    lam_g = g @ rs.roots.T
    quad = np.einsum("ki,nij,kj->nk", rs.roots, H, rs.roots)
    q = np.where(wall, quad, lam_g / np.where(wall, 1.0, lamZ))
    det = np.linalg.det(H)
    return np.log(det) + np.log(q) @ np.asarray(rs.mults, float) - np.log(normalized_rhs(rs, 1.0, Z))


BETA_GRID = np.round(0.05 * np.arange(5, 51), 2)


def _groups(rs: RootSystem):
    # With equal multiplicities the unit-length roots of a1xa1, b2 and g2
    # are permuted by the rotation through the chamber angle, which commutes
    # with the equation; the fitted data may then use one (kappa, beta) for
    # all roots.
    orbits = [list(o) for o in rs.orbits]
    if len(set(rs.mults)) == 1:
        return [sorted(i for o in orbits for i in o)]
    return orbits


def fit_surrogate(rs: RootSystem, c: float, R: float, samples: int = 65, sweeps: int = 2) -> CoshSurrogate:
    """Fit the surrogate on the arc ``|Z| = R``.

    The rates ``beta`` are picked from :data:`BETA_GRID`: first one shared
    value, then (for several root groups) ``sweeps`` rounds of coordinate
    scans, one group at a time.  For fixed rates the ``kappa`` solve a
    small, well-conditioned least-squares problem.  A joint continuous fit
    of ``(kappa, beta)`` is not used: its optimum drifts along a flat valley
    (towards ``beta -> 0`` for a2), so the result would depend on rounding
    noise and the solver output would not be reproducible.
    """
    if rs.rank != 2:
        raise ValueError("surrogate boundary data is for rank-two systems")
    phi = np.linspace(0.0, rs.theta, samples)
    arc = R * np.column_stack([np.cos(phi), np.sin(phi)])
    groups = _groups(rs)
    k = len(rs.roots)
    log_c = np.log(c)
    p0 = np.full(len(groups), 0.25 * log_c / len(groups))

    def expand(vals):
        out = np.empty(k)
        for g, idx in enumerate(groups):
            out[idx] = vals[g]
        return tuple(out)

    def resid(p, betas):
        pot = CoshSurrogate(rs, expand(np.exp(p)), expand(betas))
        return surrogate_log_residual(pot, arc) - log_c

    def fit(betas):
        sol = least_squares(resid, p0, args=(betas,), method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15)
        return sol.cost, sol.x

    def scan(betas, which):
        best = None
        for b in BETA_GRID:
            trial = list(betas)
            for g in which:
                trial[g] = float(b)
            cost, p = fit(tuple(trial))
            if best is None or cost < best[0]:
                best = (cost, tuple(trial), p)
        return best

    cost, betas, p = scan((1.0,) * len(groups), range(len(groups)))
    if len(groups) > 1:
        for _ in range(sweeps):
            for g in range(len(groups)):
                cost, betas, p = scan(betas, [g])
    return CoshSurrogate(rs, expand(np.exp(p)), expand(betas))
