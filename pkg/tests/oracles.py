"""Independent reference values used across the test suite.

Nothing here imports the package's solvers: the oracles are closed forms
or black-box scipy integrations of the same equations.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import quad, solve_ivp


def eh_value(x, c=1.0):
    return np.sqrt(c) * np.cosh(x)


def eh_derivative(x, c=1.0):
    return np.sqrt(c) * np.sinh(x)


def bc1_mults(d: int, n: int = 2) -> dict:
    """Multiplicities giving the displayed bc1 ODE with parameters ``(d, n)``."""
    return {"l": (d + 1) * n - d - 1, "2l": d}


def bc1_ode_residual(x, d1, d2, d: int, n: int, c: float):
    """``2^((d+1)n+d-1) p'^((d+1)n-1) p'' / (c sinh^((d+1)n-d-1)(2x) sinh^d(4x)) - 1``."""
    e = (d + 1) * n
    lhs = 2.0 ** (e + d - 1) * d1 ** (e - 1) * d2
    rhs = c * np.sinh(2 * x) ** (e - d - 1) * np.sinh(4 * x) ** d
    return lhs / rhs - 1.0


def radial_ode_oracle(coeffs, mults, c, x_eval, x0=0.02):
    """``rho'`` from the second-order radial ODE integrated by DOP853.

    The equation is ``P rho'^(k-1) rho'' = c prod sinh^m(2 a x)`` with
    ``P = prod (2a)^m`` and ``k = 1 + sum m``.  The start value at ``x0``
    comes from adaptive quadrature of ``(rho'^k)' = (k c / P) prod sinh^m``.
    """
    a = np.asarray(coeffs, float)
    m = np.asarray(mults, float)
    k = 1 + m.sum()
    P = np.prod((2 * a) ** m)

    def g(t):
        return float(np.prod(np.sinh(2 * a * t) ** m))

    y0 = (k * c / P * quad(g, 0.0, x0, epsabs=0, epsrel=1e-13)[0]) ** (1 / k)

    def rhs(t, y):
        return [c * g(t) / (P * y[0] ** (k - 1))]

    sol = solve_ivp(rhs, (x0, float(np.max(x_eval))), [y0], method="DOP853", rtol=1e-13, atol=1e-14, t_eval=np.sort(x_eval))
    return sol.y[0]


def fd_derivatives(f, x, delta=1e-2):
    """Fourth-order central differences for ``f'`` and ``f''``."""
    fm2, fm1, f0, fp1, fp2 = (f(x + k * delta) for k in (-2, -1, 0, 1, 2))
    d1 = (fm2 - 8 * fm1 + 8 * fp1 - fp2) / (12 * delta)
    d2 = (-fm2 + 16 * fm1 - 30 * f0 + 16 * fp1 - fp2) / (12 * delta**2)
    return d1, d2


class QuarticCosh:
    """Smooth strictly convex W-invariant test potential for any root system.

    ``sum_lambda cosh(lambda(Z)) + 0.1 |Z|^4 + |Z|^2``: not a solution of
    anything, only used where identities hold for every potential.
    """

    def __init__(self, rs):
        self.rs = rs

    def value(self, Z):
        Z = np.asarray(Z, float)
        s = np.sum(Z**2, axis=-1)
        return np.sum(np.cosh(self.rs.evaluate(Z)), axis=-1) + 0.1 * s**2 + s

    def grad(self, Z):
        Z = np.asarray(Z, float)
        s = np.sum(Z**2, axis=-1)[..., None]
        return np.sinh(self.rs.evaluate(Z)) @ self.rs.roots + 0.4 * s * Z + 2 * Z

    def hess(self, Z):
        Z = np.asarray(Z, float)
        r = self.rs.rank
        s = np.sum(Z**2, axis=-1)[..., None, None]
        L = self.rs.roots
        w = np.cosh(self.rs.evaluate(Z))
        H = np.einsum("...k,ki,kj->...ij", w, L, L)
        return H + 0.4 * s * np.eye(r) + 0.8 * Z[..., :, None] * Z[..., None, :] + 2 * np.eye(r)


def random_chamber_points(rs, count, rng, radius=(0.2, 2.0), margin=0.05):
    """Points of the open chamber with every root value above ``margin``."""
    out = []
    while len(out) < count:
        if rs.rank == 1:
            Z = rng.uniform(*radius, size=1)
        else:
            phi = rng.uniform(0, rs.theta)
            rad = rng.uniform(*radius)
            Z = rad * np.array([np.cos(phi), np.sin(phi)])
        if np.all(rs.evaluate(Z) > margin):
            out.append(Z)
    return np.array(out)
