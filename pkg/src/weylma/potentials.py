"""W-invariant potentials with value, gradient and Hessian.

Every potential exposes ``rank`` and vectorised ``value``, ``grad`` and
``hess`` on ``(..., r)`` arrays.  Analytic fixtures are exact; grid
potentials differentiate solver output with fourth-order centred
differences and use W-equivariance to answer anywhere in the truncated
domain.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CloughTocher2DInterpolator

from .rootsys import RootSystem, reflect_into_chamber

__all__ = [
    "Quadratic",
    "EguchiHanson",
    "CoshSurrogate",
    "Separable",
    "GridPotential",
]


@dataclass(frozen=True)
class Quadratic:
    """``(s / 2) |Z|^2``."""

    rank: int = 2
    scale: float = 1.0

    def value(self, Z):
        return 0.5 * self.scale * np.sum(np.asarray(Z, dtype=float) ** 2, axis=-1)

    def grad(self, Z):
        return self.scale * np.asarray(Z, dtype=float)

    def hess(self, Z):
        Z = np.asarray(Z, dtype=float)
        return np.broadcast_to(self.scale * np.eye(self.rank), Z.shape[:-1] + (self.rank, self.rank)).copy()


@dataclass(frozen=True)
class EguchiHanson:
    """Rank-one closed form ``sqrt(c) cosh x``."""

    c: float = 1.0
    rank: int = 1

    def value(self, Z):
        return np.sqrt(self.c) * np.cosh(np.asarray(Z, dtype=float)[..., 0])

    def grad(self, Z):
        return np.sqrt(self.c) * np.sinh(np.asarray(Z, dtype=float))

    def hess(self, Z):
        return (np.sqrt(self.c) * np.cosh(np.asarray(Z, dtype=float)))[..., None]


@dataclass(frozen=True)
class CoshSurrogate:
    """``sum_lambda kappa_lambda (cosh(beta_lambda lambda(Z)) - 1)``.

    W-invariant as soon as ``kappa`` and ``beta`` are constant on W-orbits
    of roots.  Strictly convex in rank two when the roots span.
    """

    rs: RootSystem
    kappa: tuple
    beta: tuple

    @property
    def rank(self) -> int:
        return self.rs.rank

    def _k_b(self):
        return np.asarray(self.kappa, dtype=float), np.asarray(self.beta, dtype=float)

    def value(self, Z):
        k, b = self._k_b()
        return np.sum(k * (np.cosh(b * self.rs.evaluate(Z)) - 1.0), axis=-1)

    def grad(self, Z):
        k, b = self._k_b()
        w = k * b * np.sinh(b * self.rs.evaluate(Z))
        return w @ self.rs.roots

    def hess(self, Z):
        k, b = self._k_b()
        w = k * b * b * np.cosh(b * self.rs.evaluate(Z))
        L = self.rs.roots
        return np.einsum("...k,ki,kj->...ij", w, L, L)


@dataclass(frozen=True)
class Separable:
    """``sum_i phi_i(Z_i)`` from even rank-one profiles, one per axis."""

    profiles: tuple

    @property
    def rank(self) -> int:
        return len(self.profiles)

    def value(self, Z):
        Z = np.asarray(Z, dtype=float)
        return sum(p(Z[..., i]) for i, p in enumerate(self.profiles))

    def grad(self, Z):
        Z = np.asarray(Z, dtype=float)
        return np.stack([p.derivative(Z[..., i]) for i, p in enumerate(self.profiles)], axis=-1)

    def hess(self, Z):
        Z = np.asarray(Z, dtype=float)
        d = np.stack([p.second_derivative(Z[..., i]) for i, p in enumerate(self.profiles)], axis=-1)
        out = np.zeros(Z.shape[:-1] + (self.rank, self.rank))
        for i in range(self.rank):
            out[..., i, i] = d[..., i]
        return out


@dataclass
class GridPotential:
    """Potential backed by nodal values on a chamber lattice.

    Nodal derivatives use fourth-order centred differences.  Off-node
    queries interpolate the nodal derivative fields (Clough-Tocher) after
    folding the point into the chamber, then map the result back with the
    Weyl element: ``grad(wZ) = w grad(Z)``, ``hess(wZ) = w hess(Z) w^T``.
    """

    lattice: object
    values_full: np.ndarray
    rs: RootSystem
    order: int = 4
    _fields: dict = field(default_factory=dict, init=False, repr=False)

    @property
    def rank(self) -> int:
        return 2

    def nodal(self) -> dict:
        if not self._fields:
            ops = self.lattice.derivative_operators(self.order)
            u = self.values_full
            self._fields.update(
                value=u[: self.lattice.n_unknown],
                gx=ops["gx"] @ u,
                gy=ops["gy"] @ u,
                hxx=ops["hxx"] @ u,
                hxy=ops["hxy"] @ u,
                hyy=ops["hyy"] @ u,
            )
        return self._fields

    def nodal_grad(self) -> np.ndarray:
        f = self.nodal()
        return np.column_stack([f["gx"], f["gy"]])

    def nodal_hess(self) -> np.ndarray:
        f = self.nodal()
        return np.stack(
            [np.column_stack([f["hxx"], f["hxy"]]), np.column_stack([f["hxy"], f["hyy"]])], axis=1
        )

    def _interp(self, name):
        key = "_ct_" + name
        if key not in self._fields:
            self._fields[key] = CloughTocher2DInterpolator(self.lattice.unknown_points, self.nodal()[name])
        return self._fields[key]

    def _fold(self, Z):
        Z = np.asarray(Z, dtype=float)
        flat = Z.reshape(-1, 2)
        img, idx = reflect_into_chamber(self.rs, flat, tol=1e-9)
        W = np.stack(self.rs.weyl_group)[idx]
        return Z.shape[:-1], img, W

    def _lookup(self, name, img):
        vals = self._interp(name)(img)
        if np.any(~np.isfinite(vals)):
            raise ValueError("grid potential evaluated outside the solved region")
        return vals

    def value(self, Z):
        shape, img, _ = self._fold(Z)
        return self._lookup("value", img).reshape(shape)

    def grad(self, Z):
        shape, img, W = self._fold(Z)
        g = np.column_stack([self._lookup("gx", img), self._lookup("gy", img)])
        return np.einsum("nji,nj->ni", W, g).reshape(shape + (2,))

    def hess(self, Z):
        shape, img, W = self._fold(Z)
        hxx, hxy, hyy = (self._lookup(k, img) for k in ("hxx", "hxy", "hyy"))
        H = np.stack([np.column_stack([hxx, hxy]), np.column_stack([hxy, hyy])], axis=1)
        return np.einsum("nki,nkl,nlj->nij", W, H, W).reshape(shape + (2, 2))
