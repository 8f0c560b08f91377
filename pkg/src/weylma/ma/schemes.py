"""Discrete Monge-Ampere operators on a :class:`~weylma.ma.lattice.Lattice`.

Centred operator
    The Ricci-flat equation divided by ``prod (2 lambda(Z))^m``::

        det D^2 u * prod q_lambda^m = c prod shinc(2 lambda(Z))^m,
        q_lambda = lambda(grad u) / lambda(Z),

    solved in log form.  On a wall ``lambda(Z) = 0`` the quotient is
    replaced by its limit ``lambda^T D^2 u lambda`` (grad u is tangent to
    the wall there by symmetry).

Wide stencil
    ``MA_h[u] = min over orthogonal pairs (v, w) of
    max(D_vv u, d) max(D_ww u, d) + min(D_vv u - d, 0) + min(D_ww u - d, 0)``,
    which is monotone (non-decreasing in the neighbours, non-increasing in
    the centre value) and equals ``D_vv u D_ww u`` on convex data.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve

from ..rootsys import RootSystem
from .lattice import Lattice
from .rhs import normalized_rhs

log = logging.getLogger(__name__)

WALL_EPS = 1e-9


@dataclass
class DiscreteState:
    grad: np.ndarray  # (N, 2)
    hess: np.ndarray  # (N, 3) as hxx, hxy, hyy
    det: np.ndarray
    q: np.ndarray  # (N, k)

    @property
    def admissible(self) -> bool:
        return bool(np.all(self.hess[:, 0] > 0) and np.all(self.det > 0) and np.all(self.q > 0))


class CentredOperator:
    """Log-form centred discretisation of the normalised equation.

    Parameters
    ----------
    lattice : Lattice
    rs : RootSystem
    c : float
    order : int
        Difference order (2 for the solver, 4 for post-processing).
    """

    def __init__(self, lattice: Lattice, rs: RootSystem, c: float, order: int = 2):
        self.lattice = lattice
        self.rs = rs
        self.c = float(c)
        self.ops = lattice.derivative_operators(order)
        Z = lattice.unknown_points
        self.Z = Z
        self.lamZ = rs.evaluate(Z)
        self.wall = np.abs(self.lamZ) <= WALL_EPS * lattice.h
        self.safe_lamZ = np.where(self.wall, 1.0, self.lamZ)
        self.m = np.asarray(rs.mults, dtype=float)
        self.rhs = normalized_rhs(rs, c, Z)
        self.log_rhs = np.log(self.rhs)

    def state(self, u_full) -> DiscreteState:
        o = self.ops
        g = np.column_stack([o["gx"] @ u_full, o["gy"] @ u_full])
        H = np.column_stack([o["hxx"] @ u_full, o["hxy"] @ u_full, o["hyy"] @ u_full])
        det = H[:, 0] * H[:, 2] - H[:, 1] ** 2
        L = self.rs.roots
        lam_g = g @ L.T
        quad = H[:, [0]] * L[:, 0] ** 2 + 2 * H[:, [1]] * L[:, 0] * L[:, 1] + H[:, [2]] * L[:, 1] ** 2
        q = np.where(self.wall, quad, lam_g / self.safe_lamZ)
        return DiscreteState(g, H, det, q)

    def residual(self, u_full, state: DiscreteState | None = None) -> np.ndarray:
        s = state or self.state(u_full)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.log(s.det) + np.log(s.q) @ self.m - self.log_rhs
        return np.where(np.isfinite(out), out, np.inf)

    def jacobian(self, state: DiscreteState) -> sp.csr_matrix:
        """Derivative of :meth:`residual` w.r.t. the unknown values."""
        o = self.ops
        H, det = state.hess, state.det
        J = sp.diags(H[:, 2] / det) @ o["hxx"] + sp.diags(H[:, 0] / det) @ o["hyy"]
        J = J - sp.diags(2 * H[:, 1] / det) @ o["hxy"]
        for k, (l1, l2) in enumerate(self.rs.roots):
            wall = self.wall[:, k]
            w = self.m[k] / state.q[:, k]
            dq_off = l1 * o["gx"] + l2 * o["gy"]
            dq_wall = l1 * l1 * o["hxx"] + 2 * l1 * l2 * o["hxy"] + l2 * l2 * o["hyy"]
            J = J + sp.diags(w * ~wall / self.safe_lamZ[:, k]) @ dq_off + sp.diags(w * wall) @ dq_wall
        return J.tocsc()[:, : self.lattice.n_unknown]

    def raw_residual(self, u_full) -> np.ndarray:
        """``prod (2 lambda(grad u))^m det D^2 u - c prod sinh(2 lambda(Z))^m``."""
        s = self.state(u_full)
        lam_g = s.grad @ self.rs.roots.T
        lhs = np.prod((2 * lam_g) ** self.m, axis=1) * s.det
        rhs = self.c * np.prod(np.sinh(2 * self.lamZ) ** self.m, axis=1)
        return lhs - rhs


@dataclass
class NewtonResult:
    u: np.ndarray
    iterations: int
    residual: float
    converged: bool
    history: list


def newton_centred(op: CentredOperator, u_full, tol: float, max_iter: int, max_halvings: int = 20) -> NewtonResult:
    """Damped Newton for the centred operator.

    Steps are halved until the iterate stays admissible (discretely convex
    Hessian, gradient in the chamber) and the sup-norm residual decreases.
    """
    n = op.lattice.n_unknown
    u = np.array(u_full, dtype=float)
    s = op.state(u)
    if not s.admissible:
        raise ValueError("initial guess is not admissible (convex with chamber-preserving gradient)")
    F = op.residual(u, s)
    res = float(np.abs(F).max())
    history = [res]
    it = 0
    while res > tol and it < max_iter:
        it += 1
        du = spsolve(op.jacobian(s), -F)
        t = 1.0
        for _ in range(max_halvings + 1):
            trial = u.copy()
            trial[:n] += t * du
            st = op.state(trial)
            if st.admissible:
                Ft = op.residual(trial, st)
                rt = float(np.abs(Ft).max())
                if rt < res:
                    break
            t *= 0.5
        else:
            log.warning("centred Newton: line search failed at iteration %d (residual %.3e)", it, res)
            break
        u, s, F, res = trial, st, Ft, rt
        history.append(res)
        log.debug("centred Newton %d: step %.3g residual %.3e", it, t, res)
    return NewtonResult(u, it, res, res <= tol, history)


class WideStencilMA:
    """Monotone wide-stencil determinant on a lattice."""

    def __init__(self, lattice: Lattice, directions: int = 8, delta: float = 1e-10):
        self.lattice = lattice
        self.delta = delta
        self.pairs = lattice.wide_pairs(directions)
        self.D = [(lattice.second_difference(v), lattice.second_difference(w)) for v, w in self.pairs]

    def second_differences(self, u_full) -> np.ndarray:
        """All ``D_vv u`` as an ``(N, 2 * pairs)`` array."""
        return np.column_stack([D @ u_full for pair in self.D for D in pair])

    def pair_values(self, u_full):
        d = self.delta
        vals, parts = [], []
        for Dv, Dw in self.D:
            a, b = Dv @ u_full, Dw @ u_full
            vals.append(np.maximum(a, d) * np.maximum(b, d) + np.minimum(a - d, 0) + np.minimum(b - d, 0))
            parts.append((a, b))
        return np.column_stack(vals), parts

    def __call__(self, u_full) -> np.ndarray:
        return self.pair_values(u_full)[0].min(axis=1)

    def jacobian(self, u_full) -> sp.csr_matrix:
        vals, parts = self.pair_values(u_full)
        active = vals.argmin(axis=1)
        d = self.delta
        J = None
        for p, ((Dv, Dw), (a, b)) in enumerate(zip(self.D, parts)):
            sel = active == p
            da = np.where(a > d, np.maximum(b, d), 1.0) * sel
            db = np.where(b > d, np.maximum(a, d), 1.0) * sel
            term = sp.diags(da) @ Dv + sp.diags(db) @ Dw
            J = term if J is None else J + term
        return J.tocsc()[:, : self.lattice.n_unknown]


def solve_dirichlet_ma(
    lattice: Lattice,
    f: np.ndarray,
    u0: np.ndarray,
    directions: int = 8,
    tol: float = 1e-10,
    max_iter: int = 100,
    max_halvings: int = 20,
) -> NewtonResult:
    """Solve ``MA_h[u] = f`` on the unknowns with the fixed ring taken from ``u0``.

    Damped semismooth Newton; each step is halved until the iterate stays
    discretely convex along every stencil direction and the relative
    residual decreases (at most ``max_halvings`` times).
    """
    n = lattice.n_unknown
    op = WideStencilMA(lattice, directions)
    f = np.asarray(f, dtype=float)
    u = np.array(u0, dtype=float)

    def rel(v):
        return op(v) / f - 1.0

    F = rel(u)
    res = float(np.abs(F).max())
    history = [res]
    it = 0
    while res > tol and it < max_iter:
        it += 1
        J = sp.diags(1.0 / f) @ op.jacobian(u)
        du = spsolve(J.tocsc(), -F)
        t = 1.0
        for _ in range(max_halvings + 1):
            trial = u.copy()
            trial[:n] += t * du
            if np.all(op.second_differences(trial) >= 0):
                Ft = rel(trial)
                rt = float(np.abs(Ft).max())
                if rt < res:
                    break
            t *= 0.5
        else:
            log.warning("wide-stencil Newton: line search failed at iteration %d", it)
            break
        u, F, res = trial, Ft, rt
        history.append(res)
    return NewtonResult(u, it, res, res <= tol, history)
