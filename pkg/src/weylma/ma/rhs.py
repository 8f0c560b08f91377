"""Weight functions of the W-invariant Monge-Ampere equation.

The Ricci-flat condition on the radial potential reads::

    F1(grad rho) * det(D^2 rho) = F2

with ``F1(Z) = prod 2^m |lambda(Z)|^m`` and
``F2(Z) = c prod |sinh 2 lambda(Z)|^m`` over the positive roots.
"""

from __future__ import annotations

import numpy as np

from ..rootsys import RootSystem


def f1_hat(rs: RootSystem, Z) -> np.ndarray:
    lam = rs.evaluate(Z)
    m = np.asarray(rs.mults)
    return np.prod((2.0 * np.abs(lam)) ** m, axis=-1)


def f2_hat(rs: RootSystem, c: float, Z) -> np.ndarray:
    lam = rs.evaluate(Z)
    m = np.asarray(rs.mults)
    return c * np.prod(np.abs(np.sinh(2.0 * lam)) ** m, axis=-1)


def shinc(t) -> np.ndarray:
    """``sinh(t)/t`` with the removable singularity filled in."""
    t = np.asarray(t, dtype=float)
    small = np.abs(t) < 1e-4
    safe = np.where(small, 1.0, t)
    t2 = t * t
    return np.where(small, 1.0 + t2 / 6.0 + t2 * t2 / 120.0, np.sinh(safe) / safe)


def normalized_rhs(rs: RootSystem, c: float, Z) -> np.ndarray:
    """``c prod shinc(2 lambda(Z))^m`` -- the right side after dividing the
    equation by ``prod (2 lambda(Z))^m``.  Positive everywhere, walls included."""
    lam = rs.evaluate(Z)
    m = np.asarray(rs.mults)
    return c * np.prod(shinc(2.0 * lam) ** m, axis=-1)


def ricci_flat_residual(rs: RootSystem, c: float, Z, grad, det_hess) -> np.ndarray:
    """Pointwise ``LHS - RHS`` of the Ricci-flat equation in its raw form::

        prod 2^m lambda(grad)^m * det D^2 rho  -  c prod sinh(2 lambda(Z))^m
    """
    m = np.asarray(rs.mults)
    lam_g = rs.evaluate(grad)
    lam_z = rs.evaluate(Z)
    lhs = np.prod((2.0 * lam_g) ** m, axis=-1) * det_hess
    rhs = c * np.prod(np.sinh(2.0 * lam_z) ** m, axis=-1)
    return lhs - rhs
