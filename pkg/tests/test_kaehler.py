import numpy as np
import pytest

from oracles import QuarticCosh, random_chamber_points
from weylma.kaehler import (
    HermitianBlocks,
    WallPointError,
    complex_hessian,
    cy_constancy,
    d_operator,
    det_identity_report,
    induced_metric,
    orbit_diagonal,
    orbit_diagonal_ratio,
    point_report,
    real_hessian_components,
    shape_spectrum,
)
from weylma.ma.lattice import sector_lattice
from weylma.ma.rank2 import ProblemSpec, solve_rank2
from weylma.potentials import EguchiHanson, GridPotential
from weylma.rootsys import build_root_system

ALL = [
    ("a1", {"l": 1}),
    ("a1", {"l": 3}),
    ("bc1", {"l": 2, "2l": 1}),
    ("a1xa1", {"l1": 1, "l2": 2}),
    ("a2", {"all": 1}),
    ("a2", {"all": 2}),
    ("b2", {"l1": 1, "l2": 2}),
    ("g2", {"all": 1}),
    ("g2", {"l1": 2, "l2": 1}),
]


@pytest.fixture(scope="module")
def a1():
    return build_root_system("a1", {"l": 1})


@pytest.mark.parametrize("c", [1.0, 2.5])
def test_eguchi_hanson_blocks(a1, c):
    eh = EguchiHanson(c)
    for x in [0.1, 0.7, 2.0, -1.3]:
        r = abs(x)
        G = induced_metric(a1, eh, [x])
        assert np.allclose(G, np.diag([np.sqrt(c) / 2 * np.cosh(r), -np.sqrt(c) / np.cosh(r)]), atol=1e-8, rtol=0)
        B = complex_hessian(a1, eh, [x])
        assert B.a_block[0, 0] == pytest.approx(np.sqrt(c) * np.cosh(r) / 4, rel=1e-14)
        assert B.root_entries[0][1] == pytest.approx(-np.sqrt(c) / (2 * np.cosh(r)), rel=1e-14)
        assert B.det() == pytest.approx(-c / 8, rel=1e-13)
        assert B.matrix().shape == (2, 2)
        R = real_hessian_components(a1, eh, [x])
        assert R.root_scalars[0] == pytest.approx(-np.sqrt(c) * np.sinh(r) / np.tanh(r), rel=1e-14)
        assert np.all(R.mixed == 0)


def test_eguchi_hanson_is_calabi_yau(a1):
    c = 3.0
    pts = np.linspace(0.05, 4, 200)[:, None]
    dev, mean = cy_constancy(a1, EguchiHanson(c), pts)
    assert dev <= 1e-8
    assert mean == pytest.approx(c / 8, rel=1e-12)


def test_wall_points_are_rejected():
    rs = build_root_system("b2", {"all": 1})
    pot = QuarticCosh(rs)
    with pytest.raises(WallPointError):
        complex_hessian(rs, pot, [1.0, 0.0])
    with pytest.raises(WallPointError):
        d_operator(rs, pot, [0.0, 0.0])


def test_hermitian_blocks_validation():
    with pytest.raises(ValueError):
        HermitianBlocks(np.array([[1.0, 2.0], [0.0, 1.0]]), ((0, 1.0, 1),), 3)
    with pytest.raises(ValueError):
        HermitianBlocks(np.eye(2), ((0, 1.0, 2),), 3)


@pytest.mark.parametrize("family,mults", ALL)
def test_det_identity_ratio_is_constant(family, mults):
    rs = build_root_system(family, mults)
    pot = QuarticCosh(rs)
    pts = random_chamber_points(rs, 100, np.random.default_rng(11))
    ratios = np.array([det_identity_report(rs, pot, Z)[2] for Z in pts])
    assert np.ptp(ratios) <= 1e-10 * abs(ratios.mean())
    assert ratios.mean() == pytest.approx(2.0 ** (rs.n - rs.rank), rel=1e-12)


@pytest.mark.parametrize("family,mults", ALL)
def test_orbit_diagonal_is_half_the_root_entry(family, mults):
    rs = build_root_system(family, mults)
    pot = QuarticCosh(rs)
    for Z in random_chamber_points(rs, 20, np.random.default_rng(2)):
        for k in range(len(rs.roots)):
            assert orbit_diagonal_ratio(rs, pot, Z, k) == pytest.approx(0.5, abs=1e-12)
            assert np.isfinite(orbit_diagonal(rs, pot, Z, k))


@pytest.mark.parametrize("family,mults", ALL)
def test_d_operator_is_weyl_invariant(family, mults):
    rs = build_root_system(family, mults)
    pot = QuarticCosh(rs)
    for Z in random_chamber_points(rs, 10, np.random.default_rng(4)):
        ref = d_operator(rs, pot, Z)
        for w in rs.weyl_group:
            assert d_operator(rs, pot, w @ Z) == pytest.approx(ref, rel=1e-10)


@pytest.mark.parametrize("family,mults", ALL)
def test_shape_spectrum_product(family, mults):
    rs = build_root_system(family, mults)
    rng = np.random.default_rng(9)
    for Z in random_chamber_points(rs, 20, rng):
        v = rng.normal(size=rs.rank)
        s = shape_spectrum(rs, Z, v)
        lam_v = rs.evaluate(v)
        assert np.allclose(s.eigen_pd * s.eigen_p, lam_v**2, atol=1e-12, rtol=0)
        assert len(s.pairs()) == len(rs.roots)


def test_blocks_fold_into_the_chamber():
    rs = build_root_system("a2", {"all": 1})
    pot = QuarticCosh(rs)
    Z = np.array([0.9, 0.3])
    for w in rs.weyl_group:
        assert np.allclose(induced_metric(rs, pot, w @ Z), induced_metric(rs, pot, Z), atol=1e-12)


def test_point_report():
    rs = build_root_system("b2", {"all": 1})
    rep = point_report(rs, QuarticCosh(rs), [-0.4, 1.1], cy_reference=1.0)
    assert rep["ratio"] == pytest.approx(2.0 ** (rs.n - 2))
    assert set(rep) >= {"Z", "Z_chamber", "a_block", "root_entries", "det_lhs", "det_rhs", "d_op", "cy_dev"}
    assert np.all(rs.evaluate(rep["Z_chamber"]) > 0)


@pytest.mark.parametrize("order,expected", [(2, 1.9), (4, 3.8)])
def test_grid_gradient_consistency_order(order, expected):
    rs = build_root_system("g2", {"all": 1})
    pot = QuarticCosh(rs)
    errs = []
    for h in (0.1, 0.05):
        lat = sector_lattice(rs, 1.0, h)
        gp = GridPotential(lat, pot.value(lat.points), rs, order=order)
        P = lat.unknown_points
        errs.append(max(np.abs(gp.nodal_grad() - pot.grad(P)).max(), np.abs(gp.nodal_hess() - pot.hess(P)).max()))
    assert np.log2(errs[0] / errs[1]) >= expected


def test_grid_potential_off_node_equivariance():
    rs = build_root_system("b2", {"all": 1})
    pot = QuarticCosh(rs)
    lat = sector_lattice(rs, 1.2, 0.04)
    gp = GridPotential(lat, pot.value(lat.points), rs)
    Z = np.array([[0.5, 0.2], [0.3, 0.1]])
    for w in rs.weyl_group:
        assert np.allclose(gp.grad(Z @ w.T), gp.grad(Z) @ w.T, atol=1e-12)
        assert np.allclose(gp.hess(Z @ w.T), np.einsum("ij,njk,lk->nil", w, gp.hess(Z), w), atol=1e-10)
    assert np.allclose(gp.grad(Z), pot.grad(Z), atol=1e-4)
    with pytest.raises(ValueError):
        gp.value(np.array([[5.0, 0.1]]))


def test_cy_constancy_on_solved_a2():
    rs = build_root_system("a2", {"all": 1})
    sol = solve_rank2(ProblemSpec(rs, 2.0**rs.n, 2.0, 64))
    dev, mean = cy_constancy(rs, sol)
    assert dev <= 1e-3
    assert mean == pytest.approx(0.25, rel=1e-3)
