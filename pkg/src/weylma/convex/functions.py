"""Convex functions with exact or polytopal subdifferentials.

Two representations share one interface:

* :class:`ClosedFormFn` -- a maximum of smooth or norm-like pieces with
  exact subgradient evaluators, used as fixtures;
* :class:`GridConvexFn` -- samples on a uniform rectangular grid, extended
  by the lower convex envelope of the lifted data.
"""

from __future__ import annotations

import csv
import io
import json
from abc import ABC, abstractmethod
from dataclasses import dataclass
from itertools import combinations, product
from typing import Callable

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from ._geometry import barycentric, hull2d, polygon_area

__all__ = [
    "SubgradientSet",
    "BorelBox",
    "ConvexFn",
    "ClosedFormFn",
    "GridConvexFn",
    "DomainError",
    "Piece",
]

ACTIVE_TOL = 1e-12
DISC_VERTICES = 1024


class DomainError(ValueError):
    """A point or box lies outside the domain of a convex function."""


@dataclass(frozen=True, eq=False)
class SubgradientSet:
    """Convex polytope of slopes, stored as its vertex list.

    For rank one the vertices are the (one or two) interval endpoints; for
    rank two they are counter-clockwise hull vertices.
    """

    vertices: np.ndarray

    def __post_init__(self):
        v = np.atleast_2d(np.asarray(self.vertices, dtype=float))
        if v.size == 0:
            raise ValueError("a subgradient set needs at least one vertex")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    @classmethod
    def from_points(cls, points) -> "SubgradientSet":
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[1] == 1:
            lo, hi = pts.min(), pts.max()
            if hi - lo <= ACTIVE_TOL * max(1.0, abs(lo), abs(hi)):
                return cls(np.array([[lo]]))
            return cls(np.array([[lo], [hi]]))
        return cls(hull2d(pts))

    @property
    def rank(self) -> int:
        return self.vertices.shape[1]

    @property
    def is_singleton(self) -> bool:
        return len(self.vertices) == 1

    def bounds(self):
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def measure(self) -> float:
        """Lebesgue measure (length or area) of the set."""
        if self.rank == 1:
            return float(np.ptp(self.vertices))
        return polygon_area(self.vertices)

    def contains(self, p, tol: float = 1e-9) -> bool:
        p = np.asarray(p, dtype=float)
        v = self.vertices
        if self.rank == 1 or len(v) <= 2:
            if len(v) == 1:
                return bool(np.all(np.abs(p - v[0]) <= tol))
            a, b = v[0], v[-1]
            d = b - a
            t = float(np.dot(p - a, d) / np.dot(d, d))
            return -tol <= t <= 1 + tol and bool(np.all(np.abs(a + t * d - p) <= tol))
        a, b = v, np.roll(v, -1, axis=0)
        cross = (b[:, 0] - a[:, 0]) * (p[1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (p[0] - a[:, 0])
        return bool(np.all(cross >= -tol))

    def __repr__(self):
        return f"SubgradientSet(vertices={self.vertices.tolist()})"


@dataclass(frozen=True)
class BorelBox:
    """Closed axis-aligned box ``[lower, upper]`` in R^r."""

    lower: tuple
    upper: tuple

    def __post_init__(self):
        lo = tuple(float(v) for v in np.atleast_1d(self.lower))
        hi = tuple(float(v) for v in np.atleast_1d(self.upper))
        if len(lo) != len(hi):
            raise ValueError("lower and upper must have the same length")
        if any(a > b for a, b in zip(lo, hi)):
            raise ValueError(f"box lower {lo} exceeds upper {hi}")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def rank(self) -> int:
        return len(self.lower)

    def contains(self, x, tol: float = 0.0) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        lo, hi = np.array(self.lower), np.array(self.upper)
        return np.all((x >= lo - tol) & (x <= hi + tol), axis=-1)

    def volume(self) -> float:
        return float(np.prod(np.subtract(self.upper, self.lower)))


def as_boxes(B) -> list[BorelBox]:
    if isinstance(B, BorelBox):
        return [B]
    boxes = list(B)
    if not all(isinstance(b, BorelBox) for b in boxes):
        raise TypeError("expected a BorelBox or an iterable of BorelBox")
    return boxes


class ConvexFn(ABC):
    """Convex function on a subset of R^r (r = 1 or 2)."""

    rank: int

    @abstractmethod
    def value(self, x) -> np.ndarray: ...

    @abstractmethod
    def subgradient(self, x) -> SubgradientSet: ...

    @abstractmethod
    def contains(self, x, tol: float = 1e-12) -> np.ndarray: ...

    def _point(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if x.shape != (self.rank,):
            raise ValueError(f"expected a point in R^{self.rank}, got shape {x.shape}")
        if not self.contains(x):
            raise DomainError(f"point {x.tolist()} outside the domain")
        return x

    def check_box(self, box: BorelBox):
        if box.rank != self.rank:
            raise ValueError(f"box has rank {box.rank}, function has rank {self.rank}")
        corners = np.array(list(product(*zip(box.lower, box.upper))))
        if not np.all(self.contains(corners)):
            raise DomainError(f"box {box} not inside the domain")


# ---------------------------------------------------------------------------
# closed-form fixtures


@dataclass(frozen=True)
class Piece:
    """One convex piece: a vectorised value map and its subgradient vertices."""

    value: Callable[[np.ndarray], np.ndarray]
    vertices: Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class ClosedFormFn(ConvexFn):
    """Pointwise maximum of pieces with exact subdifferentials.

    Parameters
    ----------
    name : str
        Fixture name.
    rank : int
    pieces : sequence of Piece
    hess : callable, optional
        Hessian on ``(..., r)`` points, defined almost everywhere.  Needed for
        measures and weighted identities.
    atoms : sequence of (point, SubgradientSet, measure), optional
        Points carrying a subdifferential of positive measure, i.e. the
        singular part of the Monge-Ampere measure.  The measure is stored
        separately so curved sets (discs) keep their exact area.
    grad : callable, optional
        Vectorised gradient for smooth fixtures.
    domain : (lower, upper), optional
        Bounding box of the domain; ``None`` means all of R^r.
    """

    name: str
    rank: int
    pieces: tuple
    hess: Callable | None = None
    atoms: tuple = ()
    domain: tuple | None = None
    grad: Callable | None = None

    def contains(self, x, tol: float = 1e-12):
        x = np.asarray(x, dtype=float)
        ok = np.all(np.isfinite(x), axis=-1)
        if self.domain is None:
            return ok
        lo, hi = (np.asarray(b, dtype=float) for b in self.domain)
        return ok & np.all((x >= lo - tol) & (x <= hi + tol), axis=-1)

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return np.max(np.stack([p.value(x) for p in self.pieces]), axis=0)

    def subgradient(self, x) -> SubgradientSet:
        x = self._point(x)
        vals = np.array([float(p.value(x)) for p in self.pieces])
        top = vals.max()
        active = np.abs(vals - top) <= ACTIVE_TOL * (1.0 + abs(top))
        pts = np.vstack([self.pieces[i].vertices(x) for i in np.flatnonzero(active)])
        return SubgradientSet.from_points(pts)

    def gradient(self, x):
        """Gradient on ``(..., r)`` points of differentiability."""
        x = np.asarray(x, dtype=float)
        if self.grad is not None:
            return self.grad(x)
        flat = x.reshape(-1, self.rank)
        out = np.array([self.subgradient(p).vertices.mean(axis=0) for p in flat])
        return out.reshape(x.shape)

    @property
    def smooth(self) -> bool:
        return self.hess is not None and not self.atoms

    def sample(self, origin, h: float, shape) -> "GridConvexFn":
        """Sample on the grid ``origin + h * index``."""
        axes = [origin[i] + h * np.arange(shape[i]) for i in range(self.rank)]
        pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
        return GridConvexFn(origin, h, self.value(pts))


def _smooth_piece(value, grad) -> Piece:
    return Piece(value, lambda x: np.atleast_2d(grad(x)))


def _norm_vertices(scale: float, r: int):
    ang = 2 * np.pi * np.arange(DISC_VERTICES) / DISC_VERTICES
    disc = np.column_stack([np.cos(ang), np.sin(ang)])

    def vertices(x):
        nrm = np.linalg.norm(x)
        if nrm > 0:
            return scale * (x / nrm)[None, :]
        if r == 1:
            return scale * np.array([[-1.0], [1.0]])
        return scale * disc

    return vertices


def _l1_vertices(scale: float):
    def vertices(x):
        choices = [(float(np.sign(v)),) if v != 0 else (-1.0, 1.0) for v in x]
        return scale * np.array(list(product(*choices)))

    return vertices


def _norm(x):
    return np.linalg.norm(np.asarray(x, dtype=float), axis=-1)


def _l1(x):
    return np.sum(np.abs(np.asarray(x, dtype=float)), axis=-1)


def _disc_atom(radius: float, r: int):
    ball = SubgradientSet.from_points(_norm_vertices(radius, r)(np.zeros(r)))
    return (np.zeros(r), ball, 2 * radius if r == 1 else np.pi * radius**2)


def quadratic_plus_one() -> ClosedFormFn:
    """``x1^2 + x2^2 + 1``."""
    return ClosedFormFn(
        "ex33",
        2,
        (_smooth_piece(lambda x: np.sum(np.asarray(x) ** 2, axis=-1) + 1.0, lambda x: 2.0 * x),),
        hess=lambda x: np.broadcast_to(2.0 * np.eye(2), np.shape(x)[:-1] + (2, 2)),
        grad=lambda x: 2.0 * np.asarray(x, dtype=float),
    )


def radial_kink() -> ClosedFormFn:
    """``|x| + 1`` inside the unit disc, ``2|x|`` outside."""
    return ClosedFormFn(
        "ex34",
        2,
        (
            Piece(lambda x: _norm(x) + 1.0, _norm_vertices(1.0, 2)),
            Piece(lambda x: 2.0 * _norm(x), _norm_vertices(2.0, 2)),
        ),
        hess=_cone_hessian,
        atoms=(_disc_atom(1.0, 2),),
    )


def l1_kink() -> ClosedFormFn:
    """``|x1|+|x2|+1`` inside the unit diamond, ``2(|x1|+|x2|)`` outside."""
    square = SubgradientSet.from_points([[-1, -1], [1, -1], [1, 1], [-1, 1]])
    return ClosedFormFn(
        "ex35",
        2,
        (
            Piece(lambda x: _l1(x) + 1.0, _l1_vertices(1.0)),
            Piece(lambda x: 2.0 * _l1(x), _l1_vertices(2.0)),
        ),
        hess=lambda x: np.zeros(np.shape(x)[:-1] + (2, 2)),
        atoms=((np.zeros(2), square, 4.0),),
    )


def _cone_hessian(x):
    # Hessian of |x| away from 0; det vanishes in rank two
    x = np.asarray(x, dtype=float)
    r = np.linalg.norm(x, axis=-1)[..., None, None]
    u = x[..., :, None] * x[..., None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(r > 0, (np.eye(x.shape[-1]) - u / r**2) / r, 0.0)


def half_norm_sq(r: int = 2) -> ClosedFormFn:
    return ClosedFormFn(
        "half_norm_sq",
        r,
        (_smooth_piece(lambda x: 0.5 * np.sum(np.asarray(x) ** 2, axis=-1), lambda x: x),),
        hess=lambda x: np.broadcast_to(np.eye(r), np.shape(x)[:-1] + (r, r)),
        grad=lambda x: np.asarray(x, dtype=float),
    )


def euclidean_norm(r: int = 2) -> ClosedFormFn:
    """``|x|``; the subdifferential at 0 is the closed unit ball.

    In rank two the disc is represented by an inscribed regular polygon with
    ``DISC_VERTICES`` vertices, while the measure uses the exact area pi.
    """
    return ClosedFormFn(
        "euclidean_norm",
        r,
        (Piece(_norm, _norm_vertices(1.0, r)),),
        hess=_cone_hessian if r == 2 else (lambda x: np.zeros(np.shape(x)[:-1] + (1, 1))),
        atoms=(_disc_atom(1.0, r),),
    )


def max_affine(slopes, offsets) -> ClosedFormFn:
    """``max_i <s_i, x> + b_i``."""
    slopes = np.atleast_2d(np.asarray(slopes, dtype=float))
    offsets = np.asarray(offsets, dtype=float)
    if len(slopes) != len(offsets):
        raise ValueError("slopes and offsets must have the same length")
    r = slopes.shape[1]

    def piece(s, b):
        return Piece(lambda x: np.asarray(x, dtype=float) @ s + b, lambda x: s[None, :])

    fn = ClosedFormFn(
        "max_affine",
        r,
        tuple(piece(s, b) for s, b in zip(slopes, offsets)),
        hess=lambda x: np.zeros(np.shape(x)[:-1] + (r, r)),
    )
    return ClosedFormFn(fn.name, r, fn.pieces, fn.hess, atoms=_affine_atoms(fn, slopes, offsets))


def _affine_atoms(fn: ClosedFormFn, slopes, offsets):
    # vertices of the max-affine arrangement carry all of its measure
    r = slopes.shape[1]
    atoms = []
    seen: list[np.ndarray] = []
    for idx in combinations(range(len(slopes)), r + 1):
        s = slopes[list(idx)]
        a = s[1:] - s[0]
        rhs = offsets[idx[0]] - offsets[list(idx[1:])]
        if abs(np.linalg.det(a)) < 1e-14:
            continue
        x = np.linalg.solve(a, rhs)
        if any(np.allclose(x, y, atol=1e-12) for y in seen):
            continue
        sub = fn.subgradient(x)
        if sub.measure() > 0:
            seen.append(x)
            atoms.append((x, sub, sub.measure()))
    return tuple(atoms)


def abs_value() -> ClosedFormFn:
    """``|x|`` on the line."""
    return euclidean_norm(1)


def eguchi_hanson(c: float = 1.0) -> ClosedFormFn:
    """Rank-one profile ``sqrt(c) cosh x``."""
    s = np.sqrt(c)
    return ClosedFormFn(
        "eguchi_hanson",
        1,
        (_smooth_piece(lambda x: s * np.cosh(np.asarray(x)[..., 0]), lambda x: s * np.sinh(x)),),
        hess=lambda x: (s * np.cosh(np.asarray(x)))[..., None],
        grad=lambda x: s * np.sinh(np.asarray(x, dtype=float)),
    )


def radial_profile(profile) -> ClosedFormFn:
    """Wrap a :class:`~weylma.ma.rank1.RadialProfile` as a rank-one convex function."""
    xm = profile.x_max
    return ClosedFormFn(
        "radial_profile",
        1,
        (_smooth_piece(profile.value, profile.grad),),
        hess=profile.hess,
        domain=((-xm,), (xm,)),
        grad=profile.grad,
    )


FIXTURES: dict[str, Callable[[], ClosedFormFn]] = {
    "ex33": quadratic_plus_one,
    "ex34": radial_kink,
    "ex35": l1_kink,
    "half_norm_sq": half_norm_sq,
    "euclidean_norm": euclidean_norm,
    "abs": abs_value,
    "eguchi_hanson": eguchi_hanson,
}


def fixture(name: str) -> ClosedFormFn:
    try:
        return FIXTURES[name]()
    except KeyError:
        raise KeyError(f"unknown fixture {name!r}; choose from {sorted(FIXTURES)}") from None


# ---------------------------------------------------------------------------
# grid functions


class GridConvexFn(ConvexFn):
    """Convex samples on the grid ``origin + h * index`` (rank 1 or 2).

    Off-node values and subgradients come from the lower convex envelope of
    the points ``(x_node, f_node)``; for discretely convex data that is
    already convex on the triangulation it coincides with the piecewise-linear
    interpolant.
    """

    def __init__(self, origin, h: float, values, convexity_tol: float = 1e-9):
        values = np.array(values, dtype=float)
        self.rank = values.ndim
        if self.rank not in (1, 2):
            raise ValueError("grid functions must have rank 1 or 2")
        self.origin = np.atleast_1d(np.asarray(origin, dtype=float))
        if self.origin.shape != (self.rank,):
            raise ValueError("origin length does not match the value array rank")
        if h <= 0:
            raise ValueError("spacing h must be positive")
        if min(values.shape) < 2 or not np.all(np.isfinite(values)):
            raise ValueError("need finite values with at least two nodes per axis")
        self.h = float(h)
        self.values = values
        self.values.setflags(write=False)
        self._check_convex(convexity_tol)
        self._build_envelope()

    @property
    def shape(self) -> tuple:
        return self.values.shape

    @property
    def upper(self) -> np.ndarray:
        return self.origin + self.h * (np.array(self.shape) - 1)

    def nodes(self) -> np.ndarray:
        axes = [self.origin[i] + self.h * np.arange(self.shape[i]) for i in range(self.rank)]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, self.rank)

    def _check_convex(self, tol: float):
        f = self.values
        for ax in range(self.rank):
            if f.shape[ax] < 3:
                continue
            sl = [slice(None)] * self.rank
            sl[ax] = slice(1, -1)
            mid = f[tuple(sl)]
            sl[ax] = slice(2, None)
            hi = f[tuple(sl)]
            sl[ax] = slice(None, -2)
            lo = f[tuple(sl)]
            bad = hi - 2 * mid + lo < -tol * (1 + np.abs(mid))
            if np.any(bad):
                idx = np.argwhere(bad)[0]
                raise ValueError(f"values are not discretely convex along axis {ax} near {idx.tolist()}")

    def _build_envelope(self):
        pts = self.nodes()
        z = self.values.ravel()
        if self.rank == 1:
            self._build_envelope_1d(pts[:, 0], z)
            return
        lifted = np.column_stack([pts, z])
        try:
            hull = ConvexHull(lifted)
        except QhullError:
            # affine data: one plane
            coef, *_ = np.linalg.lstsq(np.column_stack([pts, np.ones(len(z))]), z, rcond=None)
            self._tri = np.array([[0, self.shape[1] - 1, len(z) - 1], [0, len(z) - self.shape[1], len(z) - 1]])
            self._grads = np.tile(coef[:2], (2, 1))
            self._offsets = np.full(2, coef[2])
        else:
            eq = hull.equations
            lower = eq[:, 2] < -1e-12
            eq = eq[lower]
            self._tri = hull.simplices[lower]
            self._grads = -eq[:, :2] / eq[:, 2:3]
            self._offsets = -eq[:, 3] / eq[:, 2]
        self._pts = pts
        self._tri_xy = pts[self._tri]
        self._tri_lo = self._tri_xy.min(axis=1)
        self._tri_hi = self._tri_xy.max(axis=1)
        self._incident: dict[int, np.ndarray] = {}
        order = np.argsort(self._tri.ravel(), kind="stable")
        verts = self._tri.ravel()[order]
        owners = order // 3
        splits = np.flatnonzero(np.diff(verts)) + 1
        for v, group in zip(verts[np.r_[0, splits]], np.split(owners, splits)):
            self._incident[int(v)] = group

    def _build_envelope_1d(self, x, z):
        # lower hull by monotone chain
        keep: list[int] = []
        for i in range(len(x)):
            while len(keep) >= 2:
                a, b = keep[-2], keep[-1]
                cross = (x[b] - x[a]) * (z[i] - z[a]) - (z[b] - z[a]) * (x[i] - x[a])
                if cross <= 1e-14 * (1 + abs(z[i])) * self.h:
                    keep.pop()
                else:
                    break
            keep.append(i)
        k = np.array(keep)
        self._knots = x[k]
        self._slopes = np.diff(z[k]) / np.diff(x[k])
        self._knot_values = z[k]

    def contains(self, x, tol: float = 1e-12):
        x = np.asarray(x, dtype=float)
        scale = tol * (1 + np.abs(self.upper).max())
        return np.all((x >= self.origin - scale) & (x <= self.upper + scale), axis=-1)

    def _containing(self, x: np.ndarray, tol: float = 1e-10) -> np.ndarray:
        """Indices of envelope triangles that contain the rank-2 point ``x``."""
        near = np.flatnonzero(np.all((x >= self._tri_lo - tol) & (x <= self._tri_hi + tol), axis=1))
        lam = barycentric(x[None, :], self._tri_xy[near])[0]
        return near[np.all(lam >= -tol, axis=1)]

    def value(self, x):
        x = np.asarray(x, dtype=float)
        if self.rank == 1:
            t = x[..., 0]
            if not np.all(self.contains(x)):
                raise DomainError("evaluation outside the grid")
            return np.interp(t, self._knots, self._knot_values)
        flat = x.reshape(-1, 2)
        if not np.all(self.contains(flat)):
            raise DomainError("evaluation outside the grid")
        out = np.empty(len(flat))
        for i, p in enumerate(flat):
            tri = self._containing(p)[0]
            out[i] = self._grads[tri] @ p + self._offsets[tri]
        return out.reshape(x.shape[:-1])

    def subgradient(self, x) -> SubgradientSet:
        """Slopes of the supporting planes of the envelope at ``x``.

        On the grid boundary only the slopes realised inside the domain are
        returned (the true subdifferential there is unbounded).
        """
        x = self._point(x)
        if self.rank == 1:
            return self._subgradient_1d(float(x[0]))
        node = self._node_index(x)
        if node is not None and node in self._incident:
            tris = self._incident[node]
        else:
            tris = self._containing(x)
        return SubgradientSet.from_points(self._grads[tris])

    def _node_index(self, x) -> int | None:
        idx = (x - self.origin) / self.h
        r = np.rint(idx)
        if np.all(np.abs(idx - r) <= 1e-10):
            i, j = (int(v) for v in r)
            return i * self.shape[1] + j
        return None

    def _subgradient_1d(self, t: float) -> SubgradientSet:
        k, s = self._knots, self._slopes
        tol = 1e-10 * self.h
        j = int(np.searchsorted(k, t))
        if j < len(k) and abs(k[j] - t) <= tol:
            left = s[j - 1] if j > 0 else s[0]
            right = s[j] if j < len(s) else s[-1]
            return SubgradientSet.from_points([[left], [right]])
        if j > 0 and abs(k[j - 1] - t) <= tol:
            return self._subgradient_1d(float(k[j - 1]))
        return SubgradientSet(np.array([[s[min(max(j - 1, 0), len(s) - 1)]]]))

    def node_subgradients(self, box: BorelBox | None = None) -> list[tuple[np.ndarray, SubgradientSet]]:
        """Subgradient polytopes of the envelope vertices (inside ``box``)."""
        if self.rank == 1:
            pts = self._knots[:, None]
            sel = pts if box is None else pts[box.contains(pts, tol=1e-12 * self.h)]
            return [(p, self._subgradient_1d(float(p[0]))) for p in sel]
        out = []
        for node, tris in self._incident.items():
            p = self._pts[node]
            if box is not None and not box.contains(p, tol=1e-12 * self.h):
                continue
            out.append((p, SubgradientSet.from_points(self._grads[tris])))
        return out

    # -- serialisation -----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "rank": self.rank,
            "origin": self.origin.tolist(),
            "h": self.h,
            "extents": list(self.shape),
            "values": self.values.ravel().tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GridConvexFn":
        shape = tuple(int(n) for n in data["extents"])
        if len(shape) != int(data["rank"]):
            raise ValueError("extents do not match rank")
        return cls(data["origin"], float(data["h"]), np.asarray(data["values"], dtype=float).reshape(shape))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "GridConvexFn":
        return cls.from_dict(json.loads(text))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        labels = ["r"] + [f"origin_{i}" for i in range(self.rank)] + ["h"]
        labels += [f"extent_{i}" for i in range(self.rank)]
        w.writerow(labels)
        w.writerow([self.rank, *map(repr, self.origin.tolist()), repr(self.h), *self.shape])
        for row in np.atleast_2d(self.values):
            w.writerow([repr(float(v)) for v in row])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "GridConvexFn":
        rows = [r for r in csv.reader(io.StringIO(text)) if r]
        head = rows[1]
        r = int(head[0])
        origin = [float(v) for v in head[1 : 1 + r]]
        h = float(head[1 + r])
        shape = tuple(int(v) for v in head[2 + r : 2 + 2 * r])
        values = np.array([[float(v) for v in row] for row in rows[2:]])
        return cls(origin, h, values.reshape(shape))

