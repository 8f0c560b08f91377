"""Metric-level formulas built from a radial potential.

All block formulas take ``Z`` through
:func:`~weylma.rootsys.reflect_into_chamber` first and refuse wall points.
The normalisations are implemented as stated, including two constant
factors that do not cancel (a factor 2 between the shape-operator
combination and the complex-Hessian root entry, and ``2^(n-r)`` between the
determinant of the complex Hessian and the determinant identity); these are
reported as ratios rather than corrected.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ma.verify import inner_derivatives
from .rootsys import RootSystem, reflect_into_chamber

__all__ = [
    "WallPointError",
    "RealHessian",
    "HermitianBlocks",
    "ShapeSpectrum",
    "real_hessian_components",
    "complex_hessian",
    "induced_metric",
    "d_operator",
    "det_identity_report",
    "cy_constancy",
    "cy_determinant",
    "shape_spectrum",
    "orbit_diagonal",
    "orbit_diagonal_ratio",
    "point_report",
]

WALL_TOL = 1e-12


class WallPointError(ValueError):
    """Formula evaluated where some root vanishes."""


def _fold(rs: RootSystem, Z) -> np.ndarray:
    Z = np.atleast_1d(np.asarray(Z, dtype=float))
    if Z.shape != (rs.rank,):
        raise ValueError(f"expected a point in R^{rs.rank}")
    Zc, _ = reflect_into_chamber(rs, Z)
    _check_off_walls(rs, Zc)
    return Zc


def _check_off_walls(rs: RootSystem, Z):
    lam = rs.evaluate(Z)
    bad = np.flatnonzero(np.abs(lam) <= WALL_TOL * max(1.0, float(np.abs(Z).max())))
    if bad.size:
        raise WallPointError(f"Z={np.asarray(Z).tolist()} lies on the wall of root {int(bad[0])}")


def _data(rs: RootSystem, rho, Z):
    g = np.asarray(rho.grad(Z), dtype=float).reshape(rs.rank)
    H = np.asarray(rho.hess(Z), dtype=float).reshape(rs.rank, rs.rank)
    return rs.evaluate(Z), rs.evaluate(g), H


@dataclass(frozen=True)
class RealHessian:
    a_block: np.ndarray
    root_scalars: np.ndarray
    mixed: np.ndarray


@dataclass(frozen=True)
class HermitianBlocks:
    """Block-diagonal complex Hessian: ``a_block`` plus one scalar per root.

    ``root_entries`` holds ``(root index, value, multiplicity)``.
    """

    a_block: np.ndarray
    root_entries: tuple
    n_total: int

    def __post_init__(self):
        a = self.a_block
        if not np.allclose(a, a.T, atol=1e-12 * max(1.0, np.abs(a).max())):
            raise ValueError("a_block must be symmetric")
        if self.n_total != a.shape[0] + sum(m for _, _, m in self.root_entries):
            raise ValueError("n_total does not match the block sizes")

    def diagonal_entries(self) -> np.ndarray:
        return np.concatenate([[v] * m for _, v, m in self.root_entries]) if self.root_entries else np.zeros(0)

    def matrix(self) -> np.ndarray:
        r = self.a_block.shape[0]
        out = np.zeros((self.n_total, self.n_total))
        out[:r, :r] = self.a_block
        d = self.diagonal_entries()
        out[r:, r:] = np.diag(d)
        return out

    def det(self) -> float:
        return float(np.linalg.det(self.a_block) * np.prod([v**m for _, v, m in self.root_entries]))


@dataclass(frozen=True)
class ShapeSpectrum:
    """Per root: ``(eigen_pd, eigen_p)`` for the normal direction ``v``."""

    eigen_pd: np.ndarray
    eigen_p: np.ndarray

    def pairs(self):
        return list(zip(self.eigen_pd.tolist(), self.eigen_p.tolist()))


def real_hessian_components(rs: RootSystem, rho, Z) -> RealHessian:
    """Euclidean Hessian, root scalars ``-lambda(grad rho)/tanh lambda(Z)`` and
    the vanishing mixed block."""
    Z = _fold(rs, Z)
    lamZ, lamG, H = _data(rs, rho, Z)
    k = len(rs.roots)
    return RealHessian(H, -lamG / np.tanh(lamZ), np.zeros((rs.rank, k)))


def complex_hessian(rs: RootSystem, rho, Z) -> HermitianBlocks:
    """``(1/4) Hess rho`` and root entries ``-lambda(grad rho)/sinh 2 lambda(Z)``."""
    Z = _fold(rs, Z)
    lamZ, lamG, H = _data(rs, rho, Z)
    vals = -lamG / np.sinh(2 * lamZ)
    entries = tuple((i, float(v), m) for i, (v, m) in enumerate(zip(vals, rs.mults)))
    return HermitianBlocks(0.25 * H, entries, rs.n)


def induced_metric(rs: RootSystem, rho, Z) -> np.ndarray:
    """Block-diagonal induced metric: ``(1/2) Hess rho`` and
    ``-2 lambda(grad rho)/sinh 2 lambda(Z)`` per root direction."""
    Z = _fold(rs, Z)
    lamZ, lamG, H = _data(rs, rho, Z)
    r = rs.rank
    d = np.concatenate([[-2 * g / np.sinh(2 * z)] * m for g, z, m in zip(lamG, lamZ, rs.mults)])
    out = np.zeros((rs.n, rs.n))
    out[:r, :r] = 0.5 * H
    out[r:, r:] = np.diag(d)
    return out


def d_operator(rs: RootSystem, rho, Z) -> float:
    """``(-1)^(n-r) prod (2 lambda(grad rho) / sinh 2 lambda(Z))^m``.

    Evaluated at ``Z`` as given (any open chamber), so W-invariance can be
    observed directly.
    """
    Z = np.atleast_1d(np.asarray(Z, dtype=float))
    _check_off_walls(rs, Z)
    lamZ, lamG, _ = _data(rs, rho, Z)
    m = np.asarray(rs.mults)
    sign = -1.0 if (rs.n - rs.rank) % 2 else 1.0
    return float(sign * np.prod((2 * lamG / np.sinh(2 * lamZ)) ** m))


def det_identity_report(rs: RootSystem, rho, Z):
    """``(lhs, rhs, ratio)`` with ``lhs = det`` of the complex Hessian and
    ``rhs = 4^-n det(Hess rho) D(rho)(Z)``."""
    Zc = _fold(rs, Z)
    lhs = complex_hessian(rs, rho, Zc).det()
    H = np.asarray(rho.hess(Zc), dtype=float).reshape(rs.rank, rs.rank)
    rhs = 4.0 ** (-rs.n) * float(np.linalg.det(H)) * d_operator(rs, rho, Zc)
    return lhs, rhs, lhs / rhs


def cy_determinant(rs: RootSystem, grads, hess, Z) -> np.ndarray:
    """Vectorised ``det`` of the complex Hessian from gradients and Hessians."""
    lamZ = rs.evaluate(Z)
    lamG = grads @ rs.roots.T
    m = np.asarray(rs.mults)
    detH = np.linalg.det(hess)
    return (0.25**rs.rank) * detH * np.prod((-lamG / np.sinh(2 * lamZ)) ** m, axis=-1)


def cy_constancy(rs: RootSystem, rho, points=None):
    """Spread of ``|det|`` of the complex Hessian.

    Parameters
    ----------
    rs : RootSystem
    rho : Solution or potential
        A solver :class:`~weylma.ma.rank2.Solution` (evaluated on its inner
        chamber-interior nodes with fourth-order differences) or any object
        with ``grad``/``hess`` (evaluated on ``points``).
    points : array, optional
        Evaluation points for plain potentials.

    Returns
    -------
    (max_dev, mean_det)
        ``max |d/mean - 1|`` and the mean of ``|d|``.
    """
    if points is None:
        Z, g, H = inner_derivatives(rho)
    else:
        Z = np.atleast_2d(np.asarray(points, dtype=float))
        g = np.asarray(rho.grad(Z), dtype=float).reshape(len(Z), rs.rank)
        H = np.asarray(rho.hess(Z), dtype=float).reshape(len(Z), rs.rank, rs.rank)
    d = np.abs(cy_determinant(rs, g, H, Z))
    mean = float(d.mean())
    return float(np.abs(d / mean - 1).max()), mean


def shape_spectrum(rs: RootSystem, Z, v) -> ShapeSpectrum:
    """``-lambda(v)/tanh lambda(Z)`` and ``-lambda(v) tanh lambda(Z)`` per root."""
    Z = np.atleast_1d(np.asarray(Z, dtype=float))
    _check_off_walls(rs, Z)
    lamZ = rs.evaluate(Z)
    lamV = rs.evaluate(np.atleast_1d(np.asarray(v, dtype=float)))
    return ShapeSpectrum(-lamV / np.tanh(lamZ), -lamV * np.tanh(lamZ))


def orbit_diagonal(rs: RootSystem, rho, Z, root: int) -> float:
    """``(1/4)(-lambda(grad rho)/tanh lambda(Z) + tanh lambda(Z) lambda(grad rho))``."""
    Z = _fold(rs, Z)
    lamZ, lamG, _ = _data(rs, rho, Z)
    t, g = lamZ[root], lamG[root]
    return 0.25 * (-g / np.tanh(t) + np.tanh(t) * g)


def orbit_diagonal_ratio(rs: RootSystem, rho, Z, root: int) -> float:
    """Ratio of :func:`orbit_diagonal` to the complex-Hessian root entry."""
    entry = complex_hessian(rs, rho, Z).root_entries[root][1]
    return orbit_diagonal(rs, rho, Z, root) / entry


def point_report(rs: RootSystem, rho, Z, cy_reference: float | None = None) -> dict:
    """JSON-ready summary of every block formula at one point."""
    Zc = _fold(rs, Z)
    blocks = complex_hessian(rs, rho, Zc)
    lhs, rhs, ratio = det_identity_report(rs, rho, Zc)
    out = {
        "Z": np.atleast_1d(np.asarray(Z, dtype=float)).tolist(),
        "Z_chamber": Zc.tolist(),
        "a_block": blocks.a_block.tolist(),
        "root_entries": [[i, v, m] for i, v, m in blocks.root_entries],
        "det_lhs": lhs,
        "det_rhs": rhs,
        "ratio": ratio,
        "d_op": d_operator(rs, rho, Zc),
    }
    if cy_reference is not None:
        out["cy_dev"] = abs(abs(lhs) / cy_reference - 1.0)
    return out
