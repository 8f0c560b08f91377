"""Small planar-geometry kernels (hulls, areas, point tests)."""

from __future__ import annotations

import numpy as np


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def hull2d(points, tol: float = 1e-12) -> np.ndarray:
    """Vertices of the convex hull of planar points, counter-clockwise.

    Degenerate inputs come back as one point (all coincide) or the two
    extreme endpoints (all collinear).  Andrew's monotone chain; collinear
    boundary points are dropped.
    """
    pts = np.unique(np.round(np.asarray(points, dtype=float), 15), axis=0)
    scale = max(1.0, float(np.abs(pts).max())) if pts.size else 1.0
    eps = tol * scale
    if len(pts) == 1:
        return pts
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    pts = pts[order]

    def chain(seq):
        out: list[np.ndarray] = []
        for p in seq:
            while len(out) >= 2 and _cross(out[-2], out[-1], p) <= eps * scale:
                out.pop()
            out.append(p)
        return out

    lower = chain(pts)
    upper = chain(pts[::-1])
    hull = lower[:-1] + upper[:-1]
    hull_arr = np.array(hull)
    if len(hull_arr) >= 3:
        return hull_arr
    # collinear: keep the two extreme points
    d = pts - pts[0]
    direction = pts[-1] - pts[0]
    proj = d @ direction
    ends = np.array([pts[np.argmin(proj)], pts[np.argmax(proj)]])
    if np.abs(ends[0] - ends[1]).max() <= eps:
        return ends[:1]
    return ends


def polygon_area(vertices) -> float:
    v = np.asarray(vertices, dtype=float)
    if len(v) < 3:
        return 0.0
    x, y = v[:, 0], v[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def in_convex_polygon(points, vertices, tol: float = 0.0) -> np.ndarray:
    """Boolean mask of ``points`` inside a counter-clockwise convex polygon."""
    p = np.asarray(points, dtype=float)
    v = np.asarray(vertices, dtype=float)
    if len(v) < 3:
        return np.zeros(p.shape[0], dtype=bool)
    a = v
    b = np.roll(v, -1, axis=0)
    cross = (b[:, 0] - a[:, 0]) * (p[:, None, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (
        p[:, None, 0] - a[:, 0]
    )
    return np.all(cross >= -tol, axis=1)


def barycentric(points, triangles) -> np.ndarray:
    """Barycentric coordinates of each point w.r.t. each triangle.

    ``points`` (P, 2), ``triangles`` (T, 3, 2) -> (P, T, 3).
    """
    p = np.asarray(points, dtype=float)[:, None, :]
    t0, t1, t2 = triangles[:, 0], triangles[:, 1], triangles[:, 2]
    v0, v1 = t1 - t0, t2 - t0
    det = v0[:, 0] * v1[:, 1] - v0[:, 1] * v1[:, 0]
    d = p - t0
    l1 = (d[..., 0] * v1[:, 1] - d[..., 1] * v1[:, 0]) / det
    l2 = (v0[:, 0] * d[..., 1] - v0[:, 1] * d[..., 0]) / det
    return np.stack([1.0 - l1 - l2, l1, l2], axis=-1)
