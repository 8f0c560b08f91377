"""One test per acceptance criterion, each recording a PASS/FAIL summary line."""

import time

import numpy as np
import pytest
from threadpoolctl import threadpool_limits

from oracles import QuarticCosh, bc1_mults, bc1_ode_residual, fd_derivatives, random_chamber_points
from weylma.convex import BorelBox, eguchi_hanson, l1_kink, quadratic_plus_one, radial_kink, subgradient, weighted_ma_identity_check
from weylma.kaehler import cy_constancy, d_operator, det_identity_report, induced_metric, orbit_diagonal_ratio, shape_spectrum
from weylma.ma.lattice import box_lattice
from weylma.ma.rank1 import solve_rank1
from weylma.ma.rank2 import ProblemSpec, inner_mask, solve_rank2
from weylma.ma.rhs import f1_hat, f2_hat
from weylma.ma.schemes import solve_dirichlet_ma
from weylma.ma.verify import chamber_preservation, inner_derivatives, inner_residual
from weylma.potentials import EguchiHanson, Separable
from weylma.rootsys import build_root_system, weyl_orbit

SYSTEMS = [
    ("a1", {"l": 1}),
    ("a1", {"l": 3}),
    ("bc1", {"l": 2, "2l": 1}),
    ("a1xa1", {"all": 1}),
    ("a1xa1", {"l1": 1, "l2": 2}),
    ("a2", {"all": 1}),
    ("a2", {"all": 4}),
    ("b2", {"all": 1}),
    ("b2", {"l1": 1, "l2": 2}),
    ("g2", {"all": 1}),
    ("g2", {"l1": 2, "l2": 1}),
]


def sorted_rows(v):
    v = np.asarray(v, float)
    return v[np.lexsort(v.T[::-1])]


def test_eguchi_hanson_closed_form(criterion):
    rs = build_root_system("a1", {"l": 1})
    t0 = time.perf_counter()
    p = solve_rank1(rs, 1.0, 5.0, 2001)
    x = np.linspace(0.0, 5.0, 1001)
    err = float(np.abs(p.derivative(x) - np.sinh(x)).max())
    Zs = np.linspace(0.05, 5.0, 200)
    c = 1.0
    target = lambda z: np.diag([np.sqrt(c) / 2 * np.cosh(z), -np.sqrt(c) / np.cosh(z)])
    metric = max(
        max(np.abs(induced_metric(rs, p, [z]) - target(z)).max() for z in Zs),
        max(np.abs(induced_metric(rs, EguchiHanson(c), [z]) - target(z)).max() for z in Zs),
    )
    elapsed = time.perf_counter() - t0
    ok = err <= 1e-8 and metric <= 1e-8 and elapsed < 1.0
    criterion(1, "Eguchi-Hanson closed form", ok, f"rho' err {err:.2e}, metric err {metric:.2e}, {elapsed:.2f} s")
    assert ok


def test_bc1_example_ode(criterion):
    worst, slowest = 0.0, 0.0
    for d in (1, 3, 7):
        rs = build_root_system("bc1", bc1_mults(d, 2))
        t0 = time.perf_counter()
        p = solve_rank1(rs, 1.0, 4.2, 2001)
        x = np.linspace(0.1, 4.0, 400)
        d1, d2 = fd_derivatives(p, x)
        res = float(np.abs(bc1_ode_residual(x, d1, d2, d, 2, 1.0)).max())
        slowest = max(slowest, time.perf_counter() - t0)
        worst = max(worst, res)
    ok = worst <= 1e-6 and slowest < 1.0
    criterion(2, "bc1 ODE residual, d = 1, 3, 7", ok, f"max relative residual {worst:.2e}, slowest {slowest:.2f} s")
    assert ok


def test_subgradient_fixtures(criterion):
    cases = [
        (quadratic_plus_one(), [[2.0, 0.0]]),
        (radial_kink(), [[1.0, 0.0], [2.0, 0.0]]),
        (l1_kink(), [[1.0, -1.0], [1.0, 1.0], [2.0, 2.0], [2.0, -2.0]]),
    ]
    errs = []
    for f, expected in cases:
        got = subgradient(f, [1.0, 0.0]).vertices
        errs.append(np.abs(sorted_rows(got) - sorted_rows(expected)).max() if len(got) == len(expected) else np.inf)
    patch = subgradient(l1_kink(), [1.0, 0.0])
    inside = all(patch.contains([a, a * b]) for a in np.linspace(1, 2, 7) for b in np.linspace(-1, 1, 7))
    ok = max(errs) <= 1e-12 and inside
    criterion(3, "subgradient fixtures ex33/ex34/ex35", ok, f"max vertex error {max(errs):.1e}")
    assert ok


def test_weighted_identity(criterion):
    rs = build_root_system("a1", {"l": 1})
    c = 1.0
    f = eguchi_hanson(c)
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(20):
        lo, hi = np.sort(rng.uniform(0.1, 3.0, size=2))
        r = weighted_ma_identity_check(f, lambda z: f1_hat(rs, z), lambda z: f2_hat(rs, c, z), BorelBox((lo,), (hi,)))
        worst = max(worst, r)
    ok = worst <= 1e-6
    criterion(4, "weighted identity, 20 random boxes", ok, f"max residual {worst:.2e}")
    assert ok


def test_product_system_oracle(criterion):
    rs = build_root_system("a1xa1", {"all": 1})
    c = 2.0**rs.n
    t0 = time.perf_counter()
    with threadpool_limits(limits=1):
        sol = solve_rank2(ProblemSpec(rs, c, 2.0, 128, tol=1e-6))
    elapsed = time.perf_counter() - t0
    a1 = build_root_system("a1", {"l": 1})
    p = solve_rank1(a1, np.sqrt(c), 2.0, 4001)
    oracle = Separable((p, p))
    mask = inner_mask(rs, sol.points, sol.spec.R, sol.spec.h)
    u_ref = oracle.value(sol.points[mask])
    v_err = float(np.abs(sol.values[mask] - u_ref).max() / np.abs(u_ref).max())
    Z, g, _ = inner_derivatives(sol)
    g_ref = oracle.grad(Z)
    g_err = float(np.abs(g - g_ref).max() / np.abs(g_ref).max())
    ok = sol.converged and v_err <= 1e-4 and g_err <= 1e-4 and elapsed < 60
    criterion(5, "a1xa1 separable oracle at grid_n 128", ok, f"values {v_err:.1e}, gradients {g_err:.1e}, {elapsed:.1f} s")
    assert ok


@pytest.mark.slow
@pytest.mark.parametrize("family", ["a2", "b2", "g2"])
def test_rank_two_unit_multiplicities(criterion, family):
    rs = build_root_system(family, {"all": 1})
    c = 2.0**rs.n
    rows, ok = [], True
    devs = []
    for n in (64, 128):
        t0 = time.perf_counter()
        sol = solve_rank2(ProblemSpec(rs, c, 2.0, n))
        elapsed = time.perf_counter() - t0
        res, f2 = inner_residual(sol)
        preserved, _ = chamber_preservation(sol)
        dev, _ = cy_constancy(rs, sol)
        devs.append(dev)
        ok &= sol.converged and res <= 1e-3 * f2 and preserved and dev <= 1e-2 and elapsed < 300
        rows.append(f"n={n}: res/F2 {res / f2:.1e}, cy {dev:.1e}, {elapsed:.1f} s")
    ok &= devs[1] < devs[0]
    criterion(6, f"{family} unit multiplicities", ok, "; ".join(rows))
    assert ok


def test_identity_chain_ratios(criterion):
    spread, orbit = 0.0, 0.0
    for family, mults in SYSTEMS:
        rs = build_root_system(family, mults)
        pot = QuarticCosh(rs)
        pts = random_chamber_points(rs, 100, np.random.default_rng(17))
        ratios = np.array([det_identity_report(rs, pot, Z)[2] for Z in pts])
        spread = max(spread, float(np.ptp(ratios) / abs(ratios.mean())))
        for Z in pts[:20]:
            for k in range(len(rs.roots)):
                orbit = max(orbit, abs(orbit_diagonal_ratio(rs, pot, Z, k) - 0.5))
    ok = spread <= 1e-10 and orbit <= 1e-12
    criterion(7, "identity-chain ratios", ok, f"det ratio spread {spread:.1e}, orbit diagonal |ratio - 1/2| {orbit:.1e}")
    assert ok


def _monotone(f, x, y):
    P = subgradient(f, x).vertices
    Q = subgradient(f, y).vertices
    d = np.asarray(x) - np.asarray(y)
    return np.min((P[:, None, :] - Q[None, :, :]) @ d) >= -1e-12 * max(1.0, np.abs(d).max())


def test_property_suites(criterion):
    details, ok = [], True

    rng = np.random.default_rng(8)
    mono = True
    for f in (quadratic_plus_one(), radial_kink(), l1_kink()):
        pts = rng.uniform(-2, 2, size=(10_000, 2, 2))
        pts[:2000, 0] /= np.linalg.norm(pts[:2000, 0], axis=1)[:, None]
        pts[2000:4000, 0] /= np.abs(pts[2000:4000, 0]).sum(axis=1)[:, None]
        mono &= all(_monotone(f, x, y) for x, y in pts)
    details.append(f"monotonicity {'ok' if mono else 'violated'}")
    ok &= mono

    orders = {"a1xa1": 4, "a2": 6, "b2": 8, "g2": 12}
    card = all(len(weyl_orbit(build_root_system(k, {"all": 1}), 1.3 * build_root_system(k, {"all": 1}).chamber_point)) == v for k, v in orders.items())
    details.append(f"orbit sizes {'ok' if card else 'wrong'}")
    ok &= card

    inv, prod = 0.0, 0.0
    for family, mults in SYSTEMS:
        rs = build_root_system(family, mults)
        pot = QuarticCosh(rs)
        for Z in random_chamber_points(rs, 10, rng):
            ref = d_operator(rs, pot, Z)
            for w in rs.weyl_group:
                inv = max(inv, abs(d_operator(rs, pot, w @ Z) / ref - 1))
            v = rng.normal(size=rs.rank)
            s = shape_spectrum(rs, Z, v)
            prod = max(prod, float(np.abs(s.eigen_pd * s.eigen_p - rs.evaluate(v) ** 2).max()))
    details.append(f"D invariance {inv:.1e}, shape product {prod:.1e}")
    ok &= inv <= 1e-10 and prod <= 1e-12

    lat = box_lattice(16, 1 / 15)
    x, y = lat.points.T
    g = 0.5 * (x**2 + y**2)
    n = lat.n_unknown
    f_small = 0.5 + 0.5 * rng.random(n)
    f_large = f_small + 0.5 * rng.random(n)
    u_small = solve_dirichlet_ma(lat, f_small, g, tol=1e-12).u
    u_large = solve_dirichlet_ma(lat, f_large, g, tol=1e-12).u
    gap = float((u_large[:n] - u_small[:n]).max())
    details.append(f"comparison max(u_large - u_small) {gap:.1e}")
    ok &= gap <= 1e-12

    criterion(8, "property suites", ok, ", ".join(details))
    assert ok
