"""Rank-one reduction: the radial ODE solved by quadrature.

For ``Delta_+ = {a_i lambda}`` with multiplicities ``m_i`` the equation for
the even profile ``rho(x) = rho(x e1)`` is::

    prod (2 a_i)^{m_i} * rho'^{k-1} rho'' = c * prod sinh(2 a_i x)^{m_i}

with ``k = 1 + sum m_i``.  Since ``k rho'^{k-1} rho'' = (rho'^k)'`` this
integrates in closed form up to one quadrature::

    rho'(x) = (k c / P * int_0^x prod sinh(2 a_i t)^{m_i} dt)^(1/k),

``P = prod (2 a_i)^{m_i}``.  The integrand is handled in log space so the
large-multiplicity cases (``sinh^8(2x) sinh^7(4x)``) stay finite.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from ..quadrature import gauss_legendre
from ..rootsys import RootSystem

__all__ = ["RadialProfile", "solve_rank1", "rank1_data"]


def _log_sinh(y):
    y = np.asarray(y, dtype=float)
    with np.errstate(divide="ignore"):
        return y - np.log(2.0) + np.log(-np.expm1(-2.0 * y))


def rank1_data(rs: RootSystem):
    """Root coefficients ``a_i``, multiplicities, ``k`` and ``log P``."""
    if rs.rank != 1:
        raise ValueError(f"expected a rank-one root system, got rank {rs.rank}")
    a = np.abs(rs.roots[:, 0])
    m = np.asarray(rs.mults, dtype=float)
    k = int(1 + m.sum())
    log_p = float(np.sum(m * np.log(2.0 * a)))
    return a, m, k, log_p


@dataclass
class RadialProfile:
    """Even radial profile on ``[0, x_max]`` with cubic Hermite interpolation.

    Nodal arrays hold ``rho``, ``rho'`` and ``rho''``; ``rho(0) = rho'(0) = 0``.
    Evaluation outside ``[0, x_max]`` (in absolute value) raises.
    """

    rs: RootSystem
    c: float
    x: np.ndarray
    values: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    exact_derivative: object = field(default=None, repr=False, compare=False)
    _spl0: CubicHermiteSpline = field(init=False, repr=False)
    _spl1: CubicHermiteSpline = field(init=False, repr=False)

    def __post_init__(self):
        self._spl0 = CubicHermiteSpline(self.x, self.values, self.d1)
        self._spl1 = CubicHermiteSpline(self.x, self.d1, self.d2)

    @property
    def x_max(self) -> float:
        return float(self.x[-1])

    def _check(self, t):
        t = np.abs(np.asarray(t, dtype=float))
        if np.any(t > self.x_max * (1 + 1e-12)):
            raise ValueError(f"profile evaluated outside [0, {self.x_max}]")
        return t

    def __call__(self, t):
        return self._spl0(self._check(t))

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        return np.sign(t) * self._spl1(self._check(t))

    def second_derivative(self, t):
        return self._spl1.derivative()(self._check(t))

    # potential interface: Z has shape (..., 1)
    def value(self, Z):
        return self(np.asarray(Z, dtype=float)[..., 0])

    def grad(self, Z):
        return self.derivative(np.asarray(Z, dtype=float)[..., 0])[..., None]

    def hess(self, Z):
        return self.second_derivative(np.asarray(Z, dtype=float)[..., 0])[..., None, None]

    def ode_residual(self, t, relative: bool = True):
        """Residual of the radial ODE using this profile's own derivatives."""
        a, m, k, log_p = rank1_data(self.rs)
        t = np.asarray(t, dtype=float)
        lhs = np.exp(log_p) * self.derivative(t) ** (k - 1) * self.second_derivative(t)
        rhs = self.c * np.prod(np.sinh(2.0 * np.multiply.outer(t, a)) ** m, axis=-1)
        res = lhs - rhs
        return res / np.abs(rhs) if relative else res


class _Quadrature:
    """Exact evaluation of ``rho'`` at arbitrary points via nested Gauss rules."""

    def __init__(self, rs: RootSystem, c: float, x_max: float, n_nodes: int, order: int = 8):
        self.a, self.m, self.k, self.log_p = rank1_data(rs)
        self.c = float(c)
        self.edges = np.linspace(0.0, x_max, n_nodes)
        self.t, self.w = gauss_legendre(order)
        self.shift = float(self.log_g(np.array(x_max)))
        cells = self._cell_integrals(self.edges[:-1], self.edges[1:])
        self.cum = np.concatenate([[0.0], np.cumsum(cells)])

    def log_g(self, t):
        t = np.asarray(t, dtype=float)
        return np.sum(self.m * _log_sinh(2.0 * np.multiply.outer(t, self.a)), axis=-1)

    def _cell_integrals(self, lo, hi):
        lo, hi = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
        pts = lo[..., None] + (hi - lo)[..., None] * self.t
        vals = np.exp(self.log_g(pts) - self.shift)
        return (hi - lo) * np.sum(self.w * vals, axis=-1)

    def scaled_integral(self, x):
        """``exp(-shift) * int_0^x g``."""
        x = np.asarray(x, dtype=float)
        cell = np.clip(np.searchsorted(self.edges, x, side="right") - 1, 0, len(self.edges) - 2)
        base = self.edges[cell]
        return self.cum[cell] + self._cell_integrals(base, x)

    def d1(self, x):
        x = np.asarray(x, dtype=float)
        pref = (np.log(self.k * self.c) - self.log_p + self.shift) / self.k
        with np.errstate(divide="ignore"):
            return np.exp(pref + np.log(self.scaled_integral(x)) / self.k)

    def d2(self, x, d1):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            log_d2 = np.log(self.c) + self.log_g(x) - self.log_p - (self.k - 1) * np.log(d1)
            out = np.exp(log_d2)
        # rho' ~ c^(1/k) x near the origin
        return np.where(x > 0, out, self.c ** (1.0 / self.k))


def solve_rank1(rs: RootSystem, c: float, x_max: float, n_nodes: int = 2001) -> RadialProfile:
    """Integrate the rank-one Ricci-flat ODE with ``rho(0) = rho'(0) = 0``.

    Parameters
    ----------
    rs : RootSystem
        Rank-one system (``a1`` or ``bc1``).
    c : float
        Positive Ricci-flat constant.
    x_max : float
        Right end of the profile.
    n_nodes : int
        Number of profile nodes (uniform).
    """
    if rs.rank != 1:
        raise ValueError(f"solve_rank1 needs a rank-one root system, got {rs.family}")
    if c <= 0 or x_max <= 0:
        raise ValueError("c and x_max must be positive")
    if n_nodes < 3:
        raise ValueError("n_nodes must be at least 3")
    q = _Quadrature(rs, c, x_max, n_nodes)
    x = q.edges
    d1 = q.d1(x)
    d2 = q.d2(x, d1)
    # rho = int_0^x rho', again cell by cell with Gauss nodes
    lo, hi = x[:-1], x[1:]
    pts = lo[:, None] + (hi - lo)[:, None] * q.t
    cells = (hi - lo) * np.sum(q.w * q.d1(pts), axis=-1)
    values = np.concatenate([[0.0], np.cumsum(cells)])
    return RadialProfile(rs, float(c), x, values, d1, d2, exact_derivative=q.d1)
