"""Rank-two solver: truncated chamber, reflective walls, surrogate Dirichlet ring.

The iteration has two stages.

1. Monotone stage (optional, ``monotone_iters`` outer steps): the fixed
   point ``det D^2 u_{k+1} = rhs / prod q(u_k)^m`` with each Dirichlet
   problem solved by the wide-stencil scheme, relaxed with weight
   ``r / (r + sum m)`` (the value that cancels the leading-order
   oscillation of the plain fixed point).
2. Centred stage: damped Newton on the full centred discretisation of the
   normalised equation until the sup-norm log-residual is below ``tol``.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from ..potentials import CoshSurrogate
from ..rootsys import RootSystem
from .boundary import fit_surrogate
from .lattice import Lattice, sector_lattice
from .schemes import CentredOperator, newton_centred, solve_dirichlet_ma

log = logging.getLogger(__name__)

__all__ = ["ProblemSpec", "Solution", "solve_rank2", "build_lattice", "inner_mask"]


@dataclass(frozen=True)
class ProblemSpec:
    """Inputs of a solve.

    Attributes
    ----------
    rs : RootSystem
    c : float
        Ricci-flat constant, positive.
    R : float
        Truncation radius (``x_max`` in rank one).
    grid_n : int
        Nodes along the radius ``[0, R]``; the spacing is ``R / (grid_n - 1)``.
    tol : float
        Sup-norm tolerance on the log-residual.
    max_iter : int
        Newton iteration cap for the centred stage.
    monotone_iters : int
        Outer steps of the monotone stage (rank two).
    directions : int or None
        Wide-stencil directions; default 8 up to ``grid_n = 128``, else 16.
    """

    rs: RootSystem
    c: float
    R: float
    grid_n: int
    tol: float = 1e-8
    max_iter: int = 50
    monotone_iters: int = 2
    directions: int | None = None

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("c must be positive")
        if not self.R > 0:
            raise ValueError("R must be positive")
        if int(self.grid_n) != self.grid_n or self.grid_n < 16:
            raise ValueError("grid_n must be an integer >= 16")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1 or self.monotone_iters < 0:
            raise ValueError("iteration counts must be positive")

    @property
    def h(self) -> float:
        return self.R / (self.grid_n - 1)

    @property
    def wide_directions(self) -> int:
        if self.directions is not None:
            return int(self.directions)
        return 8 if self.grid_n <= 128 else 16

    def to_dict(self) -> dict:
        return {
            "root_system": self.rs.to_dict(),
            "c": self.c,
            "R": self.R,
            "grid_n": self.grid_n,
            "tol": self.tol,
            "max_iter": self.max_iter,
            "monotone_iters": self.monotone_iters,
            "directions": self.directions,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ProblemSpec":
        return cls(
            RootSystem.from_dict(d["root_system"]),
            float(d["c"]),
            float(d["R"]),
            int(d["grid_n"]),
            float(d["tol"]),
            int(d["max_iter"]),
            int(d.get("monotone_iters", 2)),
            d.get("directions"),
        )


@dataclass
class Solution:
    """Converged (or best) solver output.

    ``points``/``values`` cover the unknown nodes (rank two: the closed
    truncated chamber; rank one: ``[0, R]``).  ``fixed_values`` holds the
    Dirichlet ring in rank two.  Values are shifted so that ``u(0) = 0``.
    """

    spec: ProblemSpec
    points: np.ndarray
    values: np.ndarray
    iterations: int
    final_residual: float
    converged: bool
    fixed_values: np.ndarray | None = None
    history: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)
    profile: object = None

    @property
    def rank(self) -> int:
        return self.spec.rs.rank

    @property
    def values_full(self) -> np.ndarray:
        if self.fixed_values is None:
            return self.values
        return np.concatenate([self.values, self.fixed_values])

    def lattice(self) -> Lattice:
        lat = self.__dict__.get("_lattice")
        if lat is None:
            lat = build_lattice(self.spec)
            if lat.n_unknown != len(self.values) or not np.allclose(lat.unknown_points, self.points, atol=1e-12):
                raise ValueError("solution nodes do not match the lattice implied by its spec")
            self.__dict__["_lattice"] = lat
        return lat


def build_lattice(spec: ProblemSpec) -> Lattice:
    return sector_lattice(spec.rs, spec.R, spec.h, spec.wide_directions)


def inner_mask(rs: RootSystem, points, R: float, h: float) -> np.ndarray:
    """Nodes with ``|Z| <= R/2`` at distance ``>= 2h`` from every wall."""
    pts = np.asarray(points, dtype=float)
    lam = rs.evaluate(pts) / np.linalg.norm(rs.roots, axis=1)
    # distance to the chamber walls (simple roots)
    walls = lam[:, : rs.rank]
    return (np.linalg.norm(pts, axis=1) <= R / 2 + 1e-12) & np.all(walls >= 2 * h - 1e-12, axis=1)


def _relaxed_fixed_point(op: CentredOperator, lat: Lattice, u, spec: ProblemSpec, history):
    m = np.asarray(spec.rs.mults, float)
    omega = spec.rs.rank / (spec.rs.rank + m.sum())
    for k in range(spec.monotone_iters):
        s = op.state(u)
        if not s.admissible:
            log.warning("monotone stage: iterate left the admissible cone, projecting back")
            break
        q = np.maximum(s.q, 1e-8)
        f = op.rhs / np.prod(q**m, axis=1)
        inner = solve_dirichlet_ma(lat, f, u, spec.wide_directions, tol=1e-6, max_iter=40)
        step = inner.u - u
        w = omega
        for _ in range(21):
            trial = u + w * step
            if op.state(trial).admissible:
                break
            w *= 0.5
        else:
            log.warning("monotone stage: no admissible relaxation, stopping stage")
            break
        u = trial
        res = float(np.abs(op.residual(u)).max())
        history.append(("monotone", k + 1, res, inner.iterations))
        log.info("monotone step %d: weight %.3g, centred residual %.3e (%d inner Newton)", k + 1, w, res, inner.iterations)
    return u


def solve_rank2(spec: ProblemSpec, surrogate: CoshSurrogate | None = None) -> Solution:
    """Solve the W-invariant Ricci-flat equation on the truncated chamber.

    Parameters
    ----------
    spec : ProblemSpec
        Rank-two problem.
    surrogate : CoshSurrogate, optional
        Dirichlet data and initial guess; fitted on the arc if omitted.

    Returns
    -------
    Solution
        ``converged`` is false when the centred Newton stage stalls or hits
        ``max_iter``; the best iterate is returned.
    """
    rs = spec.rs
    if rs.rank != 2:
        raise ValueError(f"solve_rank2 needs a rank-two root system, got {rs.family}")
    t0 = time.perf_counter()
    lat = build_lattice(spec)
    g = surrogate or fit_surrogate(rs, spec.c, spec.R)
    u = g.value(lat.points)
    op = CentredOperator(lat, rs, spec.c)
    history: list = []
    if spec.monotone_iters:
        u = _relaxed_fixed_point(op, lat, u, spec, history)
    res = newton_centred(op, u, spec.tol, spec.max_iter)
    history.extend(("centred", i, r, 0) for i, r in enumerate(res.history))
    u = res.u
    origin = lat.locate(np.zeros((1, 2)))[0]
    shift = u[origin]
    n = lat.n_unknown
    sol = Solution(
        spec=spec,
        points=lat.unknown_points.copy(),
        values=u[:n] - shift,
        iterations=res.iterations,
        final_residual=res.residual,
        converged=res.converged,
        fixed_values=u[n:] - shift,
        history=history,
        meta={
            "surrogate_kappa": list(map(float, g.kappa)),
            "surrogate_beta": list(map(float, g.beta)),
            "h": spec.h,
            "lattice": lat.kind,
            "nodes": n,
        },
    )
    log.info("rank-two solve: %d nodes, %d Newton steps, %.2f s", n, res.iterations, time.perf_counter() - t0)
    sol.__dict__["_lattice"] = lat
    if not res.converged:
        log.warning("rank-two solve did not converge: residual %.3e after %d iterations", res.residual, res.iterations)
    return sol
