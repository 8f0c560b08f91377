"""Command-line driver: ``solve``, ``verify``, ``subgradient`` and ``export``.

Configs are single JSON files::

    {
      "root_system": {"family": "a2", "multiplicities": {"all": 1}},
      "solver": {"c": "2^n", "R": 2.0, "grid_n": 64, "tol": 1e-8, "max_iter": 50},
      "verify": {"residual_tol": 1e-3, "cy_tol": 1e-2, "ratio_tol": 1e-10},
      "output": {"dir": "out", "stem": "a2", "formats": ["json", "csv"]}
    }

Relative output directories are resolved against the config file.  Exit
codes: 0 success, 1 usage or config error, 2 numerical failure.  The
environment variable ``MA_CY_THREADS`` caps BLAS/OpenMP threads.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_limits

from .convex import FIXTURES, fixture
from .io import read_solution, write_solution
from .kaehler import cy_constancy, det_identity_report
from .ma.rank2 import ProblemSpec, Solution
from .ma.verify import chamber_preservation, inner_nodes, inner_residual, solve
from .potentials import GridPotential
from .rootsys import build_root_system

__all__ = ["main", "Config", "ConfigError", "load_config", "cmd_solve", "cmd_verify", "cmd_subgradient", "cmd_export"]

CHECKS = ("residual", "cy", "chamber", "det_identity")
VERIFY_DEFAULTS = {"residual_tol": 1e-3, "cy_tol": 1e-2, "ratio_tol": 1e-10, "checks": list(CHECKS)}
SOLVER_KEYS = {"c", "R", "grid_n", "tol", "max_iter", "monotone_iters", "directions"}


class ConfigError(ValueError):
    """Malformed config; the message carries ``path:line``."""


class UsageError(Exception):
    pass


@dataclass
class Config:
    spec: ProblemSpec
    verify: dict
    out_dir: Path
    stem: str
    formats: tuple
    source: Path | None = None
    raw: dict = field(default_factory=dict, repr=False)

    def output_paths(self) -> list[Path]:
        return [self.out_dir / f"{self.stem}.{fmt}" for fmt in self.formats]


def _line_of(text: str, key: str) -> int:
    """1-based line of the first ``"key":`` occurrence (1 if absent)."""
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    return text.count("\n", 0, m.start()) + 1 if m else 1


def _section(data: dict, name: str, text: str, where: str) -> dict:
    sec = data.get(name)
    if sec is None:
        raise ConfigError(f"{where}:1: missing section {name!r}")
    if not isinstance(sec, dict):
        raise ConfigError(f"{where}:{_line_of(text, name)}: section {name!r} must be an object")
    return sec


def _parse_c(value, n: int) -> float:
    if isinstance(value, str):
        m = re.fullmatch(r"\s*2\s*\^\s*n\s*", value)
        if not m:
            raise ValueError(f"c must be a number or '2^n', got {value!r}")
        return float(2**n)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValueError(f"c must be a number or '2^n', got {value!r}")
    return float(value)


def load_config(path) -> Config:
    """Parse and validate a JSON config; errors carry ``path:line``."""
    path = Path(path)
    where = str(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{where}:0: cannot read config ({exc.strerror})") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{where}:{exc.lineno}: invalid JSON: {exc.msg} (column {exc.colno})") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{where}:1: config must be a JSON object")

    rsd = _section(data, "root_system", text, where)
    try:
        rs = build_root_system(rsd["family"], rsd.get("multiplicities", {"all": 1}))
    except KeyError:
        raise ConfigError(f"{where}:{_line_of(text, 'root_system')}: root_system needs 'family'") from None
    except (ValueError, TypeError) as exc:
        key = "multiplicities" if "multiplicit" in str(exc) or "label" in str(exc) else "family"
        raise ConfigError(f"{where}:{_line_of(text, key)}: {exc}") from None

    sol = _section(data, "solver", text, where)
    unknown = set(sol) - SOLVER_KEYS
    if unknown:
        k = sorted(unknown)[0]
        raise ConfigError(f"{where}:{_line_of(text, k)}: unknown solver key {k!r}")
    for k in ("c", "R", "grid_n"):
        if k not in sol:
            raise ConfigError(f"{where}:{_line_of(text, 'solver')}: solver block needs {k!r}")
    try:
        c = _parse_c(sol["c"], rs.n)
    except ValueError as exc:
        raise ConfigError(f"{where}:{_line_of(text, 'c')}: {exc}") from None
    kwargs = {}
    for k, cast in (("R", float), ("grid_n", int), ("tol", float), ("max_iter", int), ("monotone_iters", int), ("directions", int)):
        if k in sol:
            v = sol[k]
            if isinstance(v, bool) or not isinstance(v, (int, float)) or (cast is int and int(v) != v):
                raise ConfigError(f"{where}:{_line_of(text, k)}: solver.{k} must be {'an integer' if cast is int else 'a number'}, got {v!r}")
            kwargs[k] = cast(v)
    try:
        spec = ProblemSpec(rs, c, **kwargs)
    except ValueError as exc:
        word = str(exc).split()[0]
        raise ConfigError(f"{where}:{_line_of(text, word if word in SOLVER_KEYS else 'solver')}: {exc}") from None

    ver = dict(VERIFY_DEFAULTS)
    if "verify" in data:
        vsec = _section(data, "verify", text, where)
        for k, v in vsec.items():
            if k not in VERIFY_DEFAULTS:
                raise ConfigError(f"{where}:{_line_of(text, k)}: unknown verify key {k!r}")
            if k == "checks":
                bad = [x for x in v if x not in CHECKS] if isinstance(v, list) else [v]
                if bad:
                    raise ConfigError(f"{where}:{_line_of(text, k)}: unknown check(s) {bad}; choose from {list(CHECKS)}")
            elif isinstance(v, bool) or not isinstance(v, (int, float)) or v <= 0:
                raise ConfigError(f"{where}:{_line_of(text, k)}: verify.{k} must be a positive number")
            ver[k] = v

    outd = data.get("output", {})
    if not isinstance(outd, dict):
        raise ConfigError(f"{where}:{_line_of(text, 'output')}: section 'output' must be an object")
    out_dir = Path(outd.get("dir", "."))
    if not out_dir.is_absolute():
        out_dir = path.parent / out_dir
    formats = outd.get("formats", ["json"])
    if isinstance(formats, str):
        formats = [formats]
    bad = [f for f in formats if f not in ("json", "csv")]
    if bad or not formats:
        raise ConfigError(f"{where}:{_line_of(text, 'formats')}: output formats must be 'json' and/or 'csv'")
    stem = str(outd.get("stem", path.stem))
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"{where}:{_line_of(text, 'dir')}: output directory not writable ({exc.strerror})") from None
    if not os.access(out_dir, os.W_OK):
        raise ConfigError(f"{where}:{_line_of(text, 'dir')}: output directory {str(out_dir)!r} is not writable")
    return Config(spec, ver, out_dir, stem, tuple(formats), path, data)


# ---------------------------------------------------------------------------
# commands


def cmd_solve(cfg: Config) -> int:
    sol = solve(cfg.spec)
    for p, fmt in zip(cfg.output_paths(), cfg.formats):
        write_solution(sol, p, fmt)
        print(f"wrote {p}")
    state = "converged" if sol.converged else "NOT converged"
    print(f"{state}: {sol.iterations} iterations, residual {sol.final_residual!r}")
    return 0 if sol.converged else 2


def _potential(sol: Solution):
    if sol.rank == 1:
        return sol.profile
    return GridPotential(sol.lattice(), sol.values_full, sol.spec.rs, order=4)


def _ratio_points(sol: Solution, count: int = 25) -> np.ndarray:
    rs = sol.spec.rs
    mask = inner_nodes(sol) & np.all(rs.evaluate(sol.points) > 1e-9, axis=1)
    pts = sol.points[mask]
    idx = np.unique(np.linspace(0, len(pts) - 1, min(count, len(pts))).astype(int))
    return pts[idx]


def verify_report(sol: Solution, ver: dict) -> dict:
    """Diagnostics of a solution against the configured tolerances."""
    checks = ver.get("checks", list(CHECKS))
    report: dict = {"family": sol.spec.rs.family, "grid_n": sol.spec.grid_n, "converged": sol.converged, "checks": {}}
    ok = True
    if "residual" in checks:
        res, f2 = inner_residual(sol)
        rel = res / f2
        passed = rel <= ver["residual_tol"]
        report["checks"]["residual"] = {"max_abs": res, "max_f2": f2, "relative": rel, "tol": ver["residual_tol"], "pass": passed}
        ok &= passed
    if "cy" in checks:
        dev, mean = cy_constancy(sol.spec.rs, sol)
        passed = dev <= ver["cy_tol"]
        report["checks"]["cy"] = {"max_dev": dev, "mean_det": mean, "tol": ver["cy_tol"], "pass": passed}
        ok &= passed
    if "chamber" in checks:
        flag, low = chamber_preservation(sol)
        report["checks"]["chamber"] = {"preserved": flag, "min_root_gradient": low, "pass": flag}
        ok &= flag
    if "det_identity" in checks:
        rho = _potential(sol)
        ratios = np.array([det_identity_report(sol.spec.rs, rho, z)[2] for z in _ratio_points(sol)])
        spread = float(ratios.max() - ratios.min())
        passed = spread <= ver["ratio_tol"]
        report["checks"]["det_identity"] = {"ratio": float(ratios.mean()), "spread": spread, "tol": ver["ratio_tol"], "pass": passed}
        ok &= passed
    report["pass"] = bool(ok)
    return report


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def cmd_verify(cfg: Config, solution_path) -> int:
    path = Path(solution_path)
    if not path.is_file():
        print(f"error: solution file {str(path)!r} not found", file=sys.stderr)
        return 1
    try:
        sol = read_solution(path)
    except (ValueError, KeyError) as exc:
        print(f"error: cannot read solution {str(path)!r}: {exc}", file=sys.stderr)
        return 1
    report = _plain(verify_report(sol, cfg.verify))
    out = cfg.out_dir / f"{cfg.stem}.report.json"
    out.write_text(json.dumps(report, indent=1, sort_keys=True) + "\n")
    print(f"wrote {out}")
    for name, r in report["checks"].items():
        print(f"{name}: {'pass' if r['pass'] else 'FAIL'}")
    return 0 if report["pass"] else 2


def cmd_subgradient(name: str, point: str) -> int:
    try:
        f = fixture(name)
    except KeyError:
        raise UsageError(f"unknown fixture {name!r}; choose from {sorted(FIXTURES)}") from None
    try:
        x = np.array([float(t) for t in point.split(",")])
    except ValueError:
        raise UsageError(f"point must be comma-separated numbers, got {point!r}") from None
    if x.size != f.rank:
        raise UsageError(f"fixture {name!r} has rank {f.rank}, point has {x.size} coordinates")
    s = f.subgradient(x)
    print(json.dumps({"fixture": name, "point": x.tolist(), "vertices": np.asarray(s.vertices).tolist()}))
    return 0


def cmd_export(solution_path, fmt: str) -> int:
    path = Path(solution_path)
    if not path.is_file():
        print(f"error: solution file {str(path)!r} not found", file=sys.stderr)
        return 1
    sol = read_solution(path)
    out = write_solution(sol, path.with_suffix("." + fmt), fmt)
    print(f"wrote {out}")
    return 0


# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _parser() -> argparse.ArgumentParser:
    p = _Parser(prog="weylma", description="W-invariant Monge-Ampere solver for Ricci-flat Kaehler potentials")
    p.add_argument("-v", "--verbose", action="store_true", help="log solver progress")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    s = sub.add_parser("solve", help="solve the problem in a config")
    s.add_argument("--config", required=True)
    v = sub.add_parser("verify", help="check a solution file against the config tolerances")
    v.add_argument("--config", required=True)
    v.add_argument("--solution", required=True)
    g = sub.add_parser("subgradient", help="print the subgradient of a built-in fixture")
    g.add_argument("--fixture", required=True)
    g.add_argument("--point", required=True)
    e = sub.add_parser("export", help="rewrite a solution file in another format")
    e.add_argument("--solution", required=True)
    e.add_argument("--format", required=True, choices=("csv", "json"))
    return p


def _run(args) -> int:
    if args.command == "subgradient":
        return cmd_subgradient(args.fixture, args.point)
    if args.command == "export":
        return cmd_export(args.solution, args.format)
    cfg = load_config(args.config)
    if args.command == "solve":
        return cmd_solve(cfg)
    return cmd_verify(cfg, args.solution)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    threads = os.environ.get("MA_CY_THREADS")
    limit = None
    if threads:
        try:
            limit = int(threads)
        except ValueError:
            print(f"error: MA_CY_THREADS must be an integer, got {threads!r}", file=sys.stderr)
            return 1
    try:
        with threadpool_limits(limits=limit):
            return _run(args)
    except (ConfigError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
