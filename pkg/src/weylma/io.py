"""Solution files (JSON and CSV) with round-trip exact floats.

Floats are written with ``repr`` (shortest round-trip form), so reloading
reproduces every value bit for bit and identical inputs give identical
files.  The CSV form starts with a ``# spec:`` comment carrying the problem
spec, then one row per node: coordinates, value, residual and the node kind
(``unknown`` or ``fixed``); rank-one files also carry ``d1``/``d2``.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from .ma.rank1 import RadialProfile
from .ma.rank2 import ProblemSpec, Solution
from .ma.verify import equation_residual

__all__ = [
    "solution_to_dict",
    "solution_from_dict",
    "solution_to_json",
    "solution_from_json",
    "solution_to_csv",
    "solution_from_csv",
    "write_solution",
    "read_solution",
]


_BULK = ("points", "values", "fixed_values", "profile")


def _floats(a) -> list:
    return [float(v) for v in np.ravel(a)]


def solution_to_dict(sol: Solution) -> dict:
    out = {
        "spec": sol.spec.to_dict(),
        "iterations": int(sol.iterations),
        "final_residual": float(sol.final_residual),
        "converged": bool(sol.converged),
        "meta": sol.meta,
        "history": [list(h) if isinstance(h, tuple) else h for h in sol.history],
        "points": [_floats(p) for p in sol.points],
        "values": _floats(sol.values),
    }
    if sol.fixed_values is not None:
        out["fixed_values"] = _floats(sol.fixed_values)
    if sol.profile is not None:
        out["profile"] = {"d1": _floats(sol.profile.d1), "d2": _floats(sol.profile.d2)}
    return out


def solution_from_dict(d: dict) -> Solution:
    spec = ProblemSpec.from_dict(d["spec"])
    points = np.asarray(d["points"], dtype=float)
    values = np.asarray(d["values"], dtype=float)
    profile = None
    if "profile" in d:
        profile = RadialProfile(
            spec.rs,
            spec.c,
            points[:, 0].copy(),
            values.copy(),
            np.asarray(d["profile"]["d1"], dtype=float),
            np.asarray(d["profile"]["d2"], dtype=float),
        )
    fixed = d.get("fixed_values")
    return Solution(
        spec=spec,
        points=points,
        values=values,
        iterations=int(d["iterations"]),
        final_residual=float(d["final_residual"]),
        converged=bool(d["converged"]),
        fixed_values=None if fixed is None else np.asarray(fixed, dtype=float),
        history=list(d.get("history", [])),
        meta=dict(d.get("meta", {})),
        profile=profile,
    )


def solution_to_json(sol: Solution) -> str:
    return json.dumps(solution_to_dict(sol), indent=1, sort_keys=True) + "\n"


def solution_from_json(text: str) -> Solution:
    return solution_from_dict(json.loads(text))


def solution_to_csv(sol: Solution) -> str:
    buf = io.StringIO()
    head = {k: v for k, v in solution_to_dict(sol).items() if k not in _BULK}
    buf.write("# spec: " + json.dumps(head, sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    r = sol.rank
    coords = ["x"] if r == 1 else ["x1", "x2"]
    extra = ["d1", "d2"] if sol.profile is not None else []
    w.writerow(coords + ["value", "residual"] + extra + ["kind"])
    res = equation_residual(sol)
    for i, (p, v) in enumerate(zip(sol.points, sol.values)):
        row = [repr(float(c)) for c in p] + [repr(float(v)), repr(float(res[i]))]
        if extra:
            row += [repr(float(sol.profile.d1[i])), repr(float(sol.profile.d2[i]))]
        w.writerow(row + ["unknown"])
    if sol.fixed_values is not None:
        fixed_pts = sol.lattice().fixed_points
        for p, v in zip(fixed_pts, sol.fixed_values):
            w.writerow([repr(float(c)) for c in p] + [repr(float(v)), ""] + ["fixed"])
    return buf.getvalue()


def solution_from_csv(text: str) -> Solution:
    lines = text.splitlines()
    if not lines or not lines[0].startswith("# spec: "):
        raise ValueError("CSV solution must start with a '# spec:' line")
    head = json.loads(lines[0][len("# spec: ") :])
    rows = list(csv.DictReader(lines[1:]))
    unknown = [row for row in rows if row["kind"] == "unknown"]
    fixed = [row for row in rows if row["kind"] == "fixed"]
    coords = ["x"] if "x" in rows[0] else ["x1", "x2"]
    head["points"] = [[float(row[c]) for c in coords] for row in unknown]
    head["values"] = [float(row["value"]) for row in unknown]
    head.pop("fixed_values", None)
    head.pop("profile", None)
    if fixed:
        head["fixed_values"] = [float(row["value"]) for row in fixed]
    if "d1" in rows[0]:
        head["profile"] = {"d1": [float(row["d1"]) for row in unknown], "d2": [float(row["d2"]) for row in unknown]}
    return solution_from_dict(head)


def write_solution(sol: Solution, path, fmt: str | None = None) -> Path:
    path = Path(path)
    fmt = fmt or path.suffix.lstrip(".")
    if fmt == "json":
        text = solution_to_json(sol)
    elif fmt == "csv":
        text = solution_to_csv(sol)
    else:
        raise ValueError(f"unknown solution format {fmt!r}")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path


def read_solution(path) -> Solution:
    path = Path(path)
    text = path.read_text()
    if path.suffix == ".csv":
        return solution_from_csv(text)
    return solution_from_json(text)
