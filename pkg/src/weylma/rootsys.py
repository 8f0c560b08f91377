"""Restricted root systems of rank one and two with multiplicities.

Roots are stored as covectors in an orthonormal basis ``(e1, e2)`` of the
flat ``a``.  In rank two the two fundamental roots are fixed by the angle
``theta`` of the family::

    l1(x1 e1 + x2 e2) = x2
    l2(x1 e1 + x2 e2) = x1 sin(theta) - x2 cos(theta)

and the remaining positive roots are generated by closing ``{l1, l2}`` under
the reflections they define.  No further length normalisation is imposed, so
the b2 and g2 systems come out with all roots of unit length; only the
dihedral combinatorics matter for everything downstream.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Mapping, NamedTuple

import numpy as np

__all__ = [
    "FAMILIES",
    "RootSystem",
    "Region",
    "Membership",
    "build_root_system",
    "weyl_orbit",
    "chamber_membership",
    "reflect_into_chamber",
]

TOL = 1e-12

FAMILIES = {
    "a1": (1, None),
    "bc1": (1, None),
    "a1xa1": (2, np.pi / 2),
    "a2": (2, np.pi / 3),
    "b2": (2, np.pi / 4),
    "g2": (2, np.pi / 6),
}

WEYL_ORDER = {"a1": 2, "bc1": 2, "a1xa1": 4, "a2": 6, "b2": 8, "g2": 12}

_LABEL_ALIASES = {"λ": "l", "2λ": "2l", "λ1": "l1", "λ2": "l2", "λ₁": "l1", "λ₂": "l2"}


class Region(Enum):
    INTERIOR = "interior"
    WALL = "wall"
    EXTERIOR = "exterior"


class Membership(NamedTuple):
    region: Region
    root: int | None = None

    def __str__(self):
        if self.region is Region.WALL:
            return f"wall({self.root})"
        return self.region.value


def _reflection_matrix(alpha: np.ndarray) -> np.ndarray:
    alpha = np.asarray(alpha, dtype=float)
    return np.eye(alpha.size) - 2.0 * np.outer(alpha, alpha) / alpha.dot(alpha)


def _close_group(generators: list[np.ndarray], tol: float = TOL, limit: int = 64):
    """Enumerate the finite matrix group generated by ``generators``."""
    r = generators[0].shape[0]
    elements = [np.eye(r)]
    frontier = [np.eye(r)]
    while frontier:
        new = []
        for g in frontier:
            for s in generators:
                cand = s @ g
                if not any(np.abs(cand - e).max() <= 1e-9 for e in elements):
                    elements.append(cand)
                    new.append(cand)
        frontier = new
        if len(elements) > limit:
            raise RuntimeError("reflection group is not finite (mis-specified roots)")
    # snap near-exact trig values (0, +-1/2, +-sqrt(3)/2, ...) to clean up drift
    return [np.where(np.abs(e) < tol, 0.0, e) for e in elements]


@dataclass(frozen=True, eq=False)
class RootSystem:
    """Positive restricted roots with multiplicities.

    Attributes
    ----------
    family : str
        One of ``a1, bc1, a1xa1, a2, b2, g2``.
    roots : ndarray, shape (k, r)
        Positive root covectors, fundamental roots first.
    mults : tuple of int
        Multiplicity ``m_lambda`` of each positive root.
    labels : tuple of str
        ``l``/``2l`` in rank one, ``l1``/``l2``/``r3``... in rank two.
    theta : float or None
        Chamber angle (rank two only).
    """

    family: str
    roots: np.ndarray
    mults: tuple[int, ...]
    labels: tuple[str, ...]
    theta: float | None = None

    def __post_init__(self):
        roots = np.array(self.roots, dtype=float, copy=True)
        if roots.ndim != 2 or roots.shape[0] != len(self.mults):
            raise ValueError("roots must be a (k, r) array matching mults")
        if np.any(np.linalg.norm(roots, axis=1) <= TOL):
            raise ValueError("root covectors must be nonzero")
        if any(int(m) != m or m <= 0 for m in self.mults):
            raise ValueError("multiplicities must be positive integers")
        roots.setflags(write=False)
        object.__setattr__(self, "roots", roots)
        object.__setattr__(self, "mults", tuple(int(m) for m in self.mults))

    @property
    def rank(self) -> int:
        return self.roots.shape[1]

    @property
    def n(self) -> int:
        """Total (complex) dimension ``r + sum m_lambda``."""
        return self.rank + sum(self.mults)

    @property
    def simple_roots(self) -> np.ndarray:
        return self.roots[: self.rank]

    @cached_property
    def weyl_group(self) -> tuple[np.ndarray, ...]:
        gens = [_reflection_matrix(a) for a in self.roots]
        return tuple(_close_group(gens))

    @cached_property
    def orbits(self) -> tuple[tuple[int, ...], ...]:
        """Partition of positive-root indices into W-orbits (up to sign)."""
        seen: dict[int, int] = {}
        groups: list[list[int]] = []
        for i in range(len(self.roots)):
            if i in seen:
                continue
            members = []
            for w in self.weyl_group:
                # covectors transform by the inverse transpose; W is orthogonal
                img = w @ self.roots[i]
                j = self._root_index(img)
                if j is not None and j not in members:
                    members.append(j)
            for j in members:
                seen[j] = len(groups)
            groups.append(sorted(members))
        return tuple(tuple(g) for g in groups)

    def _root_index(self, alpha) -> int | None:
        for j, beta in enumerate(self.roots):
            if np.abs(alpha - beta).max() <= 1e-9 or np.abs(alpha + beta).max() <= 1e-9:
                return j
        return None

    def evaluate(self, Z) -> np.ndarray:
        """Root values ``lambda(Z)``, shape ``Z.shape[:-1] + (k,)``."""
        Z = np.asarray(Z, dtype=float)
        return Z @ self.roots.T

    @property
    def chamber_point(self) -> np.ndarray:
        """A fixed point in the open chamber, used to decide positivity."""
        if self.rank == 1:
            return np.array([1.0])
        return np.array([np.cos(self.theta / 2), np.sin(self.theta / 2)])

    # serialisation -------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "theta": self.theta,
            "roots": [
                {"coeffs": [float(c) for c in a], "mult": m, "label": lab}
                for a, m, lab in zip(self.roots, self.mults, self.labels)
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data: Mapping) -> "RootSystem":
        family = data["family"]
        if family not in FAMILIES:
            raise ValueError(f"unknown root-system family {family!r}")
        rank, theta = FAMILIES[family]
        stored_theta = data.get("theta")
        if rank == 2 and (stored_theta is None or abs(stored_theta - theta) > 1e-12):
            raise ValueError(f"theta {stored_theta!r} does not match family {family}")
        entries = data["roots"]
        roots = [e["coeffs"] for e in entries]
        mults = [e["mult"] for e in entries]
        labels = [e.get("label", f"r{i + 1}") for i, e in enumerate(entries)]
        if any(len(a) != rank for a in roots):
            raise ValueError("root coefficient vectors must have length equal to the rank")
        return cls(family, np.array(roots, dtype=float), tuple(mults), tuple(labels), theta)

    @classmethod
    def from_json(cls, text: str) -> "RootSystem":
        return cls.from_dict(json.loads(text))

    def __eq__(self, other):
        if not isinstance(other, RootSystem):
            return NotImplemented
        return (
            self.family == other.family
            and self.mults == other.mults
            and self.roots.shape == other.roots.shape
            and np.allclose(self.roots, other.roots, atol=1e-12, rtol=0)
        )

    def __hash__(self):
        return hash((self.family, self.mults))


def _rank_two_roots(theta: float) -> np.ndarray:
    l1 = np.array([0.0, 1.0])
    l2 = np.array([np.sin(theta), -np.cos(theta)])
    gens = [_reflection_matrix(l1), _reflection_matrix(l2)]
    group = _close_group(gens)
    z0 = np.array([np.cos(theta / 2), np.sin(theta / 2)])
    found = [l1, l2]
    for w in group:
        for a in (l1, l2):
            img = w @ a
            if img @ z0 < 0:
                img = -img
            if not any(np.abs(img - b).max() <= 1e-9 for b in found):
                found.append(img)
    simple, rest = found[:2], found[2:]
    # remaining positive roots ordered by angle, counter-clockwise from l2
    rest.sort(key=lambda a: np.arctan2(a[1], a[0]))
    roots = np.array(simple + rest)
    roots[np.abs(roots) < TOL] = 0.0
    return roots


def build_root_system(family: str, multiplicities: Mapping[str, int]) -> RootSystem:
    """Construct a positive root system with multiplicities.

    Parameters
    ----------
    family : str
        ``a1`` (``{l}``), ``bc1`` (``{l, 2l}``), or one of the rank-two types
        ``a1xa1, a2, b2, g2``.
    multiplicities : mapping
        Rank one: keys ``"l"`` and, for ``bc1``, ``"2l"``.  Rank two: keys
        ``"l1"``/``"l2"`` assign a multiplicity to the W-orbit of the
        corresponding fundamental root; ``"all"`` sets every orbit.

    Raises
    ------
    ValueError
        Unknown family or label, non-positive multiplicity, conflicting
        values within one orbit, or an orbit left without a multiplicity.
    """
    if family not in FAMILIES:
        raise ValueError(f"unknown root-system family {family!r}")
    mults_in = {}
    for key, val in dict(multiplicities).items():
        key = _LABEL_ALIASES.get(key, key)
        if int(val) != val or val <= 0:
            raise ValueError(f"multiplicity for {key!r} must be a positive integer, got {val!r}")
        mults_in[key] = int(val)
    rank, theta = FAMILIES[family]

    if rank == 1:
        labels = ("l",) if family == "a1" else ("l", "2l")
        extra = set(mults_in) - set(labels) - {"all"}
        if extra:
            raise ValueError(f"unknown root label(s) {sorted(extra)} for {family}")
        mults = []
        for lab in labels:
            m = mults_in.get(lab, mults_in.get("all"))
            if m is None:
                raise ValueError(f"multiplicity map for {family} is missing root {lab!r}")
            mults.append(m)
        roots = np.array([[1.0]] if family == "a1" else [[1.0], [2.0]])
        return RootSystem(family, roots, tuple(mults), labels)

    roots = _rank_two_roots(theta)
    labels = ("l1", "l2") + tuple(f"r{i + 1}" for i in range(2, len(roots)))
    extra = set(mults_in) - {"l1", "l2", "all"}
    if extra:
        raise ValueError(f"unknown root label(s) {sorted(extra)} for {family}")
    proto = RootSystem(family, roots, (1,) * len(roots), labels, theta)
    mults = [0] * len(roots)
    for orbit in proto.orbits:
        reps = [lab for lab in ("l1", "l2") if proto.labels.index(lab) in orbit]
        values = {mults_in[lab] for lab in reps if lab in mults_in}
        if not values and "all" in mults_in:
            values = {mults_in["all"]}
        if len(values) > 1:
            raise ValueError(f"conflicting multiplicities {sorted(values)} within one W-orbit")
        if not values:
            raise ValueError(
                f"multiplicity map missing the W-orbit of {reps or [labels[orbit[0]]]}"
            )
        (value,) = values
        for i in orbit:
            mults[i] = value
    return RootSystem(family, roots, tuple(mults), labels, theta)


def _dedupe(points: np.ndarray, tol: float = TOL) -> np.ndarray:
    kept: list[np.ndarray] = []
    for p in points:
        if not any(np.abs(p - q).max() <= tol * max(1.0, np.abs(p).max()) for q in kept):
            kept.append(p)
    return np.array(kept)


def weyl_orbit(rs: RootSystem, Z) -> np.ndarray:
    """All distinct images ``w . Z``, as an ``(|orbit|, r)`` array."""
    Z = np.asarray(Z, dtype=float)
    return _dedupe(np.array([w @ Z for w in rs.weyl_group]))


def chamber_membership(rs: RootSystem, Z, tol: float = TOL) -> Membership:
    """Classify ``Z`` against the closed Weyl chamber.

    Exterior if some positive root is negative beyond ``tol``; otherwise
    on the wall of the first root that vanishes to within ``tol``;
    otherwise interior.
    """
    vals = rs.evaluate(Z)
    if np.any(vals < -tol):
        return Membership(Region.EXTERIOR)
    zero = np.flatnonzero(np.abs(vals) <= tol)
    if zero.size:
        return Membership(Region.WALL, int(zero[0]))
    return Membership(Region.INTERIOR)


def reflect_into_chamber(rs: RootSystem, Z, tol: float = TOL):
    """Map ``Z`` (or an array of points) into the closed chamber.

    Returns ``(w . Z, index)`` where ``index`` points into
    ``rs.weyl_group``; the identity (index 0) is preferred, so the map is
    the identity on chamber points.  Works row-wise on ``(..., r)`` arrays.
    """
    Z = np.asarray(Z, dtype=float)
    flat = Z.reshape(-1, rs.rank)
    out = np.empty_like(flat)
    index = np.full(flat.shape[0], -1, dtype=int)
    for k, w in enumerate(rs.weyl_group):
        todo = index < 0
        if not todo.any():
            break
        img = flat[todo] @ w.T
        scale = np.maximum(1.0, np.abs(img).max(axis=1))
        ok = np.all(rs.evaluate(img) >= -tol * scale[:, None], axis=1)
        rows = np.flatnonzero(todo)[ok]
        out[rows] = img[ok]
        index[rows] = k
    assert np.all(index >= 0), "reflections failed to reach the chamber"
    if Z.ndim == 1:
        return out[0], int(index[0])
    return out.reshape(Z.shape), index.reshape(Z.shape[:-1])
