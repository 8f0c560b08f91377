"""Lattices adapted to the Weyl group and sparse difference operators.

Nodes live on ``i * b1 + j * b2``.  The square lattice is invariant under
the a1xa1 and b2 Weyl groups and the hexagonal one under a2 and g2, so every
reflected stencil neighbour of a chamber node is again a chamber node.
That makes the reflective wall conditions exact: unknowns are the nodes in
the closed truncated chamber and the stencil is folded back by
:func:`~weylma.rootsys.reflect_into_chamber`.

Nodes just beyond the truncation radius form a fixed (Dirichlet) ring.
The value vector is laid out as ``[unknowns, fixed]``.
"""

from __future__ import annotations

from functools import cached_property

import numpy as np
import scipy.sparse as sp

from ..rootsys import RootSystem, reflect_into_chamber

__all__ = ["Lattice", "sector_lattice", "disc_lattice", "box_lattice", "lattice_basis"]

SQRT3 = np.sqrt(3.0)

# integer offsets used for centred derivatives
_AXIS_DIRS = {
    "square": ((1, 0), (0, 1), (1, 1), (1, -1)),
    "hex": ((1, 0), (0, 1), (-1, 1)),
}

# orthogonal pairs of lattice vectors for the wide stencil
_WIDE_PAIRS = {
    "square": (
        ((1, 0), (0, 1)),
        ((1, 1), (-1, 1)),
        ((2, 1), (-1, 2)),
        ((1, 2), (-2, 1)),
        ((3, 1), (-1, 3)),
        ((1, 3), (-3, 1)),
        ((3, 2), (-2, 3)),
        ((2, 3), (-3, 2)),
    ),
    # (1,0) is orthogonal to (-1,2), (0,1) to (2,-1), (-1,1) to (1,1)
    "hex": (
        ((1, 0), (-1, 2)),
        ((0, 1), (2, -1)),
        ((-1, 1), (1, 1)),
        ((2, 1), (-4, 5)),
        ((1, 2), (5, -4)),
        ((-1, 3), (5, -1)),
    ),
}


def lattice_basis(kind: str, h: float) -> np.ndarray:
    """Columns are the two primitive lattice vectors."""
    if kind == "square":
        return h * np.eye(2)
    if kind == "hex":
        return h * np.array([[1.0, 0.5], [0.0, SQRT3 / 2]])
    raise ValueError(f"unknown lattice kind {kind!r}")


def lattice_kind(rs: RootSystem) -> str:
    return "square" if rs.family in ("a1xa1", "b2") else "hex"


class Lattice:
    """Nodes, folding map and stencil tables for one discretisation.

    Parameters
    ----------
    kind : {"square", "hex"}
    h : float
        Lattice spacing.
    inside : callable
        ``inside(points) -> bool mask`` for the unknown nodes.
    ring : callable
        ``ring(points) -> bool mask`` for the fixed nodes.
    fold : callable, optional
        Map arbitrary points to their canonical representative (default:
        identity).
    extent : float
        Radius bounding all nodes considered.
    """

    def __init__(self, kind, h, inside, ring, extent, fold=None, rs: RootSystem | None = None):
        self.kind = kind
        self.h = float(h)
        self.rs = rs
        self.basis = lattice_basis(kind, h)
        self._inv = np.linalg.inv(self.basis)
        self._fold = fold
        n = int(np.ceil(extent / (h * (SQRT3 / 2 if kind == "hex" else 1.0)))) + 2
        ii, jj = np.meshgrid(np.arange(-n, n + 1), np.arange(-n, n + 1), indexing="ij")
        ij = np.column_stack([ii.ravel(), jj.ravel()])
        pts = ij @ self.basis.T
        unk = inside(pts)
        fix = ring(pts) & ~unk
        self.ij = np.vstack([ij[unk], ij[fix]])
        self.points = self.ij @ self.basis.T
        self.n_unknown = int(unk.sum())
        self.n_total = len(self.ij)
        self._offset = n
        self._table = np.full((2 * n + 1, 2 * n + 1), -1, dtype=np.int64)
        self._table[self.ij[:, 0] + n, self.ij[:, 1] + n] = np.arange(self.n_total)

    @property
    def unknown_points(self) -> np.ndarray:
        return self.points[: self.n_unknown]

    @property
    def fixed_points(self) -> np.ndarray:
        return self.points[self.n_unknown :]

    def locate(self, points) -> np.ndarray:
        """Node ids of (folded) points; raises if a point is not a node."""
        pts = np.asarray(points, dtype=float)
        if self._fold is not None:
            pts = self._fold(pts)
        coords = pts @ self._inv.T
        ij = np.rint(coords).astype(np.int64)
        if np.abs(coords - ij).max(initial=0.0) > 1e-6:
            raise AssertionError("folded point is off the lattice")
        n = self._offset
        if np.any(np.abs(ij) > n):
            raise IndexError("stencil leaves the lattice; enlarge the fixed ring")
        ids = self._table[ij[:, 0] + n, ij[:, 1] + n]
        if np.any(ids < 0):
            raise IndexError("stencil reaches a node outside the fixed ring")
        return ids

    def neighbours(self, offset) -> np.ndarray:
        """Ids of ``x + offset`` for every unknown node ``x``."""
        key = tuple(int(v) for v in offset)
        cache = self.__dict__.setdefault("_nbr", {})
        if key not in cache:
            shift = np.asarray(key) @ self.basis.T
            cache[key] = self.locate(self.unknown_points + shift)
        return cache[key]

    def vector(self, offset) -> np.ndarray:
        return np.asarray(offset) @ self.basis.T

    # -- operators ---------------------------------------------------------

    def _stencil(self, terms) -> sp.csr_matrix:
        """Sparse matrix from ``[(offset, weight), ...]``."""
        n = self.n_unknown
        rows, cols, vals = [], [], []
        base = np.arange(n)
        for off, w in terms:
            ids = base if off == (0, 0) else self.neighbours(off)
            rows.append(base)
            cols.append(ids)
            vals.append(np.full(n, w))
        m = sp.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(n, self.n_total),
        )
        m.sum_duplicates()
        return m

    def second_difference(self, offset, order: int = 2) -> sp.csr_matrix:
        """Second derivative along the unit vector of ``offset``."""
        o = tuple(offset)
        neg = tuple(-v for v in o)
        L2 = float(np.dot(self.vector(o), self.vector(o)))
        if order == 2:
            terms = [(o, 1.0), ((0, 0), -2.0), (neg, 1.0)]
        elif order == 4:
            o2 = tuple(2 * v for v in o)
            n2 = tuple(-2 * v for v in o)
            terms = [(o2, -1 / 12), (o, 16 / 12), ((0, 0), -30 / 12), (neg, 16 / 12), (n2, -1 / 12)]
        else:
            raise ValueError("order must be 2 or 4")
        return self._stencil([(t, w / L2) for t, w in terms])

    def first_difference(self, offset, order: int = 2) -> sp.csr_matrix:
        """First derivative along the unit vector of ``offset``."""
        o = tuple(offset)
        neg = tuple(-v for v in o)
        L = float(np.linalg.norm(self.vector(o)))
        if order == 2:
            terms = [(o, 0.5), (neg, -0.5)]
        elif order == 4:
            o2 = tuple(2 * v for v in o)
            n2 = tuple(-2 * v for v in o)
            terms = [(o2, -1 / 12), (o, 8 / 12), (neg, -8 / 12), (n2, 1 / 12)]
        else:
            raise ValueError("order must be 2 or 4")
        return self._stencil([(t, w / L) for t, w in terms])

    @cached_property
    def axis_dirs(self):
        return _AXIS_DIRS[self.kind]

    def derivative_operators(self, order: int = 2) -> dict[str, sp.csr_matrix]:
        """Sparse maps from the value vector to ``gx, gy, hxx, hxy, hyy``.

        Directional differences along the lattice directions are combined by
        least squares (exact for quadratics).
        """
        cache = self.__dict__.setdefault("_ops", {})
        if order in cache:
            return cache[order]
        dirs = self.axis_dirs
        units = np.array([self.vector(d) / np.linalg.norm(self.vector(d)) for d in dirs])
        A1 = units
        A2 = np.column_stack([units[:, 0] ** 2, 2 * units[:, 0] * units[:, 1], units[:, 1] ** 2])
        G = np.linalg.pinv(A1)
        M = np.linalg.pinv(A2)
        D1 = [self.first_difference(d, order) for d in dirs]
        D2 = [self.second_difference(d, order) for d in dirs]

        def combo(weights, mats):
            out = None
            for w, m in zip(weights, mats):
                if abs(w) < 1e-15:
                    continue
                out = w * m if out is None else out + w * m
            return out.tocsr()

        ops = {
            "gx": combo(G[0], D1),
            "gy": combo(G[1], D1),
            "hxx": combo(M[0], D2),
            "hxy": combo(M[1], D2),
            "hyy": combo(M[2], D2),
        }
        cache[order] = ops
        return ops

    def wide_pairs(self, count: int):
        return _WIDE_PAIRS[self.kind][: _n_pairs(self.kind, count)]


def _n_pairs(kind: str, count: int) -> int:
    # square: one pair per two directions; hex: 3 pairs (6 directions) or 6
    if kind == "square":
        return max(1, min(8, count // 2))
    return 3 if count <= 8 else 6


def _reach(kind: str, order: int = 4, wide: int = 16) -> float:
    # furthest stencil offset, in units of h
    best = 2.0 if order == 4 else 1.0
    if kind == "square":
        best = max(best, 2 * np.sqrt(2) if order == 4 else np.sqrt(2))
    basis = lattice_basis(kind, 1.0)
    for a, b in _WIDE_PAIRS[kind][: _n_pairs(kind, wide)]:
        best = max(best, np.linalg.norm(basis @ a), np.linalg.norm(basis @ b))
    return best


def sector_lattice(rs: RootSystem, R: float, h: float, wide: int = 8) -> Lattice:
    """Closed truncated chamber ``{lambda >= 0, |Z| <= R}`` with reflective walls."""
    kind = lattice_kind(rs)
    reach = _reach(kind, 4, wide) * h + 1e-9 * h
    eps = 1e-9 * h

    def in_chamber(p):
        return np.all(rs.evaluate(p) >= -eps, axis=1)

    def inside(p):
        return in_chamber(p) & (np.linalg.norm(p, axis=1) <= R + eps)

    def ring(p):
        r = np.linalg.norm(p, axis=1)
        return in_chamber(p) & (r > R + eps) & (r <= R + reach)

    def fold(p):
        return reflect_into_chamber(rs, p, tol=1e-9)[0]

    return Lattice(kind, h, inside, ring, R + reach, fold=fold, rs=rs)


def disc_lattice(kind: str, R: float, h: float, wide: int = 8) -> Lattice:
    """Full disc ``|Z| <= R`` without symmetry folding."""
    reach = _reach(kind, 4, wide) * h + 1e-9 * h
    eps = 1e-9 * h

    def inside(p):
        return np.linalg.norm(p, axis=1) <= R + eps

    def ring(p):
        r = np.linalg.norm(p, axis=1)
        return (r > R + eps) & (r <= R + reach)

    return Lattice(kind, h, inside, ring, R + reach)


def box_lattice(n: int, h: float, wide: int = 8) -> Lattice:
    """Square block of ``n x n`` unknowns ``{0..n-1}^2 * h`` with a fixed frame
    wide enough for every stencil."""
    reach = int(np.ceil(_reach("square", 4, wide)))
    eps = 1e-9 * h
    top = (n - 1) * h

    def inside(p):
        return np.all((p >= -eps) & (p <= top + eps), axis=1)

    def ring(p):
        return np.all((p >= -reach * h - eps) & (p <= top + reach * h + eps), axis=1)

    return Lattice("square", h, inside, ring, np.sqrt(2) * (top + reach * h))
