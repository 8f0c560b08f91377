"""Alexandrov Monge-Ampere measure and its weighted form.

For convex ``f`` the measure of a Borel set ``B`` is the volume of the
subgradient image ``(grad f)(B)``.  Subdifferentials of distinct points
overlap only in a null set, so for grid functions the exact measure is the
sum of the per-node polygon areas; a rasterised union is available as a
cross-check.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from ..quadrature import integrate_box, integrate_interval, integrate_polygon
from ._geometry import in_convex_polygon
from .functions import BorelBox, ClosedFormFn, ConvexFn, GridConvexFn, SubgradientSet, as_boxes

__all__ = [
    "subgradient",
    "ma_measure",
    "weighted_ma_identity_check",
    "gradient_image",
    "QuadratureDomainError",
]


class QuadratureDomainError(RuntimeError):
    """The subgradient image leaves the gradient-space box handed to quadrature."""


def subgradient(f: ConvexFn, x) -> SubgradientSet:
    """Set of slopes of affine minorants of ``f`` touching the graph at ``x``."""
    return f.subgradient(x)


def _merge_intervals(intervals):
    out: list[list[float]] = []
    for lo, hi in sorted(intervals):
        if out and lo <= out[-1][1]:
            out[-1][1] = max(out[-1][1], hi)
        else:
            out.append([lo, hi])
    return [tuple(iv) for iv in out]


def _image_1d(f: ConvexFn, boxes) -> list[tuple[float, float]]:
    # monotone subgradient: image of [a, b] is [min df(a), max df(b)]
    ivs = []
    for b in boxes:
        lo = f.subgradient([b.lower[0]]).vertices.min()
        hi = f.subgradient([b.upper[0]]).vertices.max()
        ivs.append((float(lo), float(hi)))
    return _merge_intervals(ivs)


def gradient_image(f: ConvexFn, B) -> list:
    """Pieces of ``(grad f)(B)`` that carry positive measure.

    Rank one: merged intervals.  Rank two: list of subgradient polygons
    (grid functions and atoms of closed-form fixtures).
    """
    boxes = as_boxes(B)
    for b in boxes:
        f.check_box(b)
    if f.rank == 1:
        return _image_1d(f, boxes)
    polys = []
    if isinstance(f, GridConvexFn):
        seen = set()
        for b in boxes:
            for p, s in f.node_subgradients(b):
                key = tuple(np.round(p, 12))
                if key not in seen and s.measure() > 0:
                    seen.add(key)
                    polys.append(s)
    else:
        for p, s, _ in getattr(f, "atoms", ()):
            if any(b.contains(p) for b in boxes):
                polys.append(s)
    return polys


def _atom_measure(f: ClosedFormFn, boxes) -> float:
    total = 0.0
    for p, _, mass in f.atoms:
        if any(b.contains(p) for b in boxes):
            total += mass
    return total


def _smooth_density(f: ClosedFormFn):
    def det(x):
        H = f.hess(x)
        return np.linalg.det(H) if f.rank == 2 else H[..., 0, 0]

    return det


def _disjoint(boxes) -> bool:
    for i, a in enumerate(boxes):
        for b in boxes[i + 1 :]:
            overlap = np.minimum(a.upper, b.upper) - np.maximum(a.lower, b.lower)
            if np.all(overlap > 0):
                return False
    return True


def ma_measure(f: ConvexFn, B, method: str = "exact", cells: int = 16, resolution: float | None = None) -> float:
    """Lebesgue measure of the subgradient image ``(grad f)(B)``.

    Parameters
    ----------
    f : ConvexFn
    B : BorelBox or iterable of BorelBox
        For closed-form fixtures in rank two the boxes must be pairwise
        disjoint up to boundaries.
    method : {"exact", "raster"}
        Grid functions only: sum of per-node polygon areas, or the area of
        their union rasterised at ``resolution`` (default ``h / 4``).
    cells : int
        Quadrature cells per axis for smooth densities.
    """
    boxes = as_boxes(B)
    for b in boxes:
        f.check_box(b)
    if f.rank == 1:
        return float(sum(hi - lo for lo, hi in _image_1d(f, boxes)))
    if isinstance(f, GridConvexFn):
        polys = gradient_image(f, boxes)
        if method == "exact":
            return float(sum(s.measure() for s in polys))
        if method == "raster":
            return _raster_union(polys, resolution or f.h / 4)
        raise ValueError(f"unknown method {method!r}")
    if not isinstance(f, ClosedFormFn) or f.hess is None:
        raise TypeError("closed-form measure needs a Hessian; sample the function on a grid instead")
    if not _disjoint(boxes):
        raise ValueError("boxes overlap; pass disjoint boxes")
    det = _smooth_density(f)
    smooth = sum(integrate_box(det, b.lower, b.upper, cells) for b in boxes)
    return float(smooth + _atom_measure(f, boxes))


def _raster_union(polys, hg: float) -> float:
    if not polys:
        return 0.0
    lo = np.min([s.bounds()[0] for s in polys], axis=0)
    hi = np.max([s.bounds()[1] for s in polys], axis=0)
    nx, ny = (np.ceil((hi - lo) / hg).astype(int) + 1).tolist()
    covered = np.zeros((nx, ny), dtype=bool)
    for s in polys:
        a, b = s.bounds()
        i0, j0 = np.floor((a - lo) / hg).astype(int)
        i1, j1 = np.ceil((b - lo) / hg).astype(int)
        xs = lo[0] + hg * (np.arange(i0, i1 + 1) + 0.5)
        ys = lo[1] + hg * (np.arange(j0, j1 + 1) + 0.5)
        pts = np.stack(np.meshgrid(xs, ys, indexing="ij"), axis=-1).reshape(-1, 2)
        inside = in_convex_polygon(pts, s.vertices).reshape(len(xs), len(ys))
        sub = covered[i0 : i1 + 1, j0 : j1 + 1]
        sub |= inside[: sub.shape[0], : sub.shape[1]]
    return float(covered.sum() * hg * hg)


def weighted_ma_identity_check(
    f: ConvexFn,
    F1: Callable,
    F2: Callable,
    B,
    grad_box: BorelBox | None = None,
    cells: int = 16,
) -> float:
    """``|int_B F2 - int_{(grad f)(B)} F1|`` by composite Gauss quadrature.

    Parameters
    ----------
    f : ConvexFn
    F1, F2 : callable
        Nonnegative weights on ``(..., r)`` point arrays (gradient space and
        parameter space respectively).
    B : BorelBox or iterable of disjoint BorelBox
    grad_box : BorelBox, optional
        Gradient-space region on which ``F1`` may be evaluated.  If the image
        leaves it a :class:`QuadratureDomainError` is raised.
    cells : int
        Quadrature cells per axis.
    """
    boxes = as_boxes(B)
    lhs = sum(integrate_box(F2, b.lower, b.upper, cells) for b in boxes)
    image = gradient_image(f, boxes)

    def _check(lo, hi):
        if grad_box is None:
            return
        if np.any(np.asarray(lo) < np.array(grad_box.lower) - 1e-12) or np.any(
            np.asarray(hi) > np.array(grad_box.upper) + 1e-12
        ):
            raise QuadratureDomainError(
                f"gradient image [{np.asarray(lo).tolist()}, {np.asarray(hi).tolist()}] "
                f"escapes the quadrature box {grad_box}"
            )

    if f.rank == 1:
        rhs = 0.0
        for lo, hi in image:
            _check([lo], [hi])
            rhs += integrate_interval(lambda p: F1(p[..., None]), lo, hi, 4 * cells)
        return float(abs(lhs - rhs))

    rhs = 0.0
    for s in image:
        _check(*s.bounds())
        rhs += integrate_polygon(F1, s.vertices)
    if isinstance(f, ClosedFormFn) and f.hess is not None:
        det = _smooth_density(f)

        def pulled(x):
            grads = f.gradient(x)
            _check(grads.reshape(-1, 2).min(axis=0), grads.reshape(-1, 2).max(axis=0))
            return F1(grads) * det(x)

        for b in boxes:
            rhs += integrate_box(pulled, b.lower, b.upper, cells)
    return float(abs(lhs - rhs))
