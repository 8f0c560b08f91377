"""Composite Gauss-Legendre rules on intervals, boxes and triangles."""

from __future__ import annotations

from functools import lru_cache

import numpy as np

ORDER = 8


@lru_cache(maxsize=None)
def gauss_legendre(order: int = ORDER):
    """Nodes and weights on ``[0, 1]``."""
    x, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (x + 1.0), 0.5 * w


def interval_nodes(edges, order: int = ORDER):
    """Quadrature nodes/weights for the cells ``[edges[i], edges[i+1]]``.

    Returns arrays of shape ``(ncells, order)``.
    """
    edges = np.asarray(edges, dtype=float)
    t, w = gauss_legendre(order)
    a, b = edges[:-1, None], edges[1:, None]
    return a + (b - a) * t, (b - a) * w


def integrate_interval(f, a: float, b: float, cells: int = 64, order: int = ORDER) -> float:
    """Composite rule for ``int_a^b f``; ``f`` must accept arrays."""
    if b == a:
        return 0.0
    x, w = interval_nodes(np.linspace(a, b, cells + 1), order)
    return float(np.sum(w * f(x)))


def integrate_box(f, lower, upper, cells: int = 16, order: int = ORDER) -> float:
    """Tensor-product composite rule over an axis-aligned box in R^r (r <= 2).

    ``f`` receives points of shape ``(..., r)``.
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    if lower.size == 1:
        return integrate_interval(lambda x: f(x[..., None]), lower[0], upper[0], cells, order)
    x, wx = interval_nodes(np.linspace(lower[0], upper[0], cells + 1), order)
    y, wy = interval_nodes(np.linspace(lower[1], upper[1], cells + 1), order)
    x, wx, y, wy = x.ravel(), wx.ravel(), y.ravel(), wy.ravel()
    pts = np.stack(np.meshgrid(x, y, indexing="ij"), axis=-1)
    return float(np.sum(np.outer(wx, wy) * f(pts)))


@lru_cache(maxsize=None)
def _triangle_rule(order: int):
    # collapsed (Duffy) tensor rule on the reference triangle
    t, w = gauss_legendre(order)
    u, v = np.meshgrid(t, t, indexing="ij")
    wu, wv = np.meshgrid(w, w, indexing="ij")
    s = u.ravel()
    r = (v * (1.0 - u)).ravel()
    weights = (wu * wv * (1.0 - u)).ravel()
    return s, r, weights


def integrate_triangle(f, p0, p1, p2, order: int = ORDER) -> float:
    p0, p1, p2 = (np.asarray(p, dtype=float) for p in (p0, p1, p2))
    s, r, w = _triangle_rule(order)
    pts = p0 + np.outer(s, p1 - p0) + np.outer(r, p2 - p0)
    jac = abs((p1 - p0)[0] * (p2 - p0)[1] - (p1 - p0)[1] * (p2 - p0)[0])
    return float(jac * np.sum(w * f(pts)))


def integrate_polygon(f, vertices, order: int = ORDER) -> float:
    """Integrate over a convex polygon given by ordered vertices (fan split)."""
    v = np.asarray(vertices, dtype=float)
    if len(v) < 3:
        return 0.0
    return sum(integrate_triangle(f, v[0], v[i], v[i + 1], order) for i in range(1, len(v) - 1))
