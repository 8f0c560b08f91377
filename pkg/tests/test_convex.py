import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import eh_value
from weylma.convex import (
    BorelBox,
    DomainError,
    GridConvexFn,
    QuadratureDomainError,
    SubgradientSet,
    euclidean_norm,
    eguchi_hanson,
    fixture,
    gradient_image,
    half_norm_sq,
    l1_kink,
    ma_measure,
    max_affine,
    quadratic_plus_one,
    radial_kink,
    subgradient,
    weighted_ma_identity_check,
)
from weylma.ma.rhs import f1_hat, f2_hat
from weylma.rootsys import build_root_system


def same_vertices(a, b, tol=1e-12):
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    if a.shape != b.shape:
        return False
    key = lambda v: np.lexsort(v.T[::-1])
    return np.abs(a[key(a)] - b[key(b)]).max() <= tol


# --- the three worked examples ---------------------------------------------


def test_smooth_example_is_a_point():
    s = subgradient(quadratic_plus_one(), [1.0, 0.0])
    assert s.is_singleton
    assert same_vertices(s.vertices, [[2.0, 0.0]])


def test_radial_kink_gives_segment():
    s = subgradient(radial_kink(), [1.0, 0.0])
    assert same_vertices(s.vertices, [[1.0, 0.0], [2.0, 0.0]])
    assert s.measure() == 0.0
    # segment {a (cos t, sin t) : a in [1, 2]} at any point of the unit circle
    t = 0.7
    s = subgradient(radial_kink(), [np.cos(t), np.sin(t)])
    assert same_vertices(s.vertices, [[np.cos(t), np.sin(t)], [2 * np.cos(t), 2 * np.sin(t)]])


def test_l1_kink_gives_patch():
    s = subgradient(l1_kink(), [1.0, 0.0])
    # {(a, a b) : 1 <= a <= 2, -1 <= b <= 1}
    assert same_vertices(s.vertices, [[1, -1], [1, 1], [2, 2], [2, -2]])
    assert s.measure() == pytest.approx(3.0, abs=1e-12)
    for a, b in [(1.5, 0.3), (1.0, -1.0), (2.0, 0.99)]:
        assert s.contains([a, a * b])
    assert not s.contains([1.5, 1.6])


def test_fixture_lookup():
    assert fixture("ex33").name == "ex33"
    with pytest.raises(KeyError):
        fixture("nope")


def test_kink_at_origin():
    s = subgradient(radial_kink(), [0.0, 0.0])
    assert s.measure() == pytest.approx(np.pi, rel=1e-4)
    assert s.contains([0.5, 0.5]) and not s.contains([0.8, 0.8])
    s = subgradient(l1_kink(), [0.0, 0.0])
    assert same_vertices(s.vertices, [[-1, -1], [1, -1], [1, 1], [-1, 1]])


def test_domain_errors():
    g = GridConvexFn([0.0, 0.0], 0.5, np.zeros((3, 3)))
    with pytest.raises(DomainError):
        g.value([5.0, 0.0])
    with pytest.raises(DomainError):
        g.subgradient([-1.0, 0.0])
    with pytest.raises(ValueError):
        GridConvexFn([0.0], 1.0, [0.0, 1.0, 0.0])  # concave


# --- monotonicity -----------------------------------------------------------


def _monotone(f, x, y):
    P = subgradient(f, x).vertices
    Q = subgradient(f, y).vertices
    d = np.asarray(x) - np.asarray(y)
    # the pairing is bilinear, so vertices realise its minimum
    return np.min((P[:, None, :] - Q[None, :, :]) @ d) >= -1e-12 * max(1.0, np.abs(d).max())


@pytest.mark.parametrize("make", [quadratic_plus_one, radial_kink, l1_kink])
def test_subgradient_monotone_10k_pairs(make):
    f = make()
    rng = np.random.default_rng(42)
    pts = rng.uniform(-2, 2, size=(10_000, 2, 2))
    # put a share of the points exactly on the kinks
    pts[:2000, 0] /= np.linalg.norm(pts[:2000, 0], axis=1)[:, None]
    pts[2000:4000, 0] /= np.abs(pts[2000:4000, 0]).sum(axis=1)[:, None]
    assert all(_monotone(f, x, y) for x, y in pts)


def test_grid_subgradient_monotone():
    x = np.linspace(-1, 1, 21)
    X, Y = np.meshgrid(x, x, indexing="ij")
    g = GridConvexFn([-1, -1], 0.1, np.hypot(X, Y) + 0.3 * X**2)
    rng = np.random.default_rng(3)
    pts = rng.uniform(-1, 1, size=(2000, 2, 2))
    pts[:500, 0] = np.round(pts[:500, 0] * 10) / 10  # nodes
    assert all(_monotone(g, a, b) for a, b in pts)


@settings(max_examples=200, deadline=None)
@given(
    st.lists(st.floats(-3, 3), min_size=2, max_size=2),
    st.lists(st.floats(-3, 3), min_size=2, max_size=2),
)
def test_monotone_property(x, y):
    assert _monotone(radial_kink(), x, y)
    assert _monotone(l1_kink(), x, y)


# --- Monge-Ampere measure ---------------------------------------------------


def test_measure_of_smooth_fixtures():
    box = BorelBox((0.0, 0.0), (1.0, 1.0))
    assert ma_measure(half_norm_sq(), box) == pytest.approx(1.0, abs=1e-12)
    assert ma_measure(quadratic_plus_one(), box) == pytest.approx(4.0, abs=1e-12)
    assert ma_measure(half_norm_sq(1), BorelBox((-1.0,), (2.0,))) == pytest.approx(3.0)


def test_measure_of_atoms():
    box = BorelBox((-0.5, -0.5), (0.5, 0.5))
    assert ma_measure(euclidean_norm(), box) == pytest.approx(np.pi, abs=1e-12)
    assert ma_measure(l1_kink(), box) == pytest.approx(4.0, abs=1e-12)
    # radial kink: the disc at the origin plus the circle where only a segment sits
    big = BorelBox((-2.0, -2.0), (2.0, 2.0))
    assert ma_measure(radial_kink(), big) == pytest.approx(np.pi, abs=1e-12)
    # no atom inside
    assert ma_measure(euclidean_norm(), BorelBox((0.5, 0.5), (1.0, 1.0))) == pytest.approx(0.0, abs=1e-12)


def test_measure_additive_on_disjoint_boxes():
    f = quadratic_plus_one()
    a = BorelBox((0.0, 0.0), (0.5, 1.0))
    b = BorelBox((0.5, 0.0), (1.0, 1.0))
    whole = BorelBox((0.0, 0.0), (1.0, 1.0))
    assert ma_measure(f, [a, b]) == pytest.approx(ma_measure(f, whole), abs=1e-12)
    g = max_affine([[0, 0], [1, 0], [0, 1]], [0, 0, 0])
    assert ma_measure(g, [BorelBox((-1, -1), (0.5, 0.5)), BorelBox((0.5, 0.5), (1, 1))]) == pytest.approx(0.5)


def test_max_affine_atom_is_slope_hull():
    slopes = np.array([[0, 0], [2, 0], [0, 3], [1, 1]])
    f = max_affine(slopes, [0, 0, 0, -5])
    s = subgradient(f, [0.0, 0.0])
    assert same_vertices(s.vertices, [[0, 0], [2, 0], [0, 3]])
    assert ma_measure(f, BorelBox((-1, -1), (1, 1))) == pytest.approx(3.0, abs=1e-12)


def test_grid_measure_exact_and_raster():
    h = 0.05
    x = np.arange(-1, 1 + h / 2, h)
    X, Y = np.meshgrid(x, x, indexing="ij")
    g = GridConvexFn([-1, -1], h, np.hypot(X, Y))
    box = BorelBox((-0.5, -0.5), (0.5, 0.5))
    exact = ma_measure(g, box)
    raster = ma_measure(g, box, method="raster")
    assert exact == pytest.approx(np.pi, rel=1e-3)
    assert raster == pytest.approx(exact, rel=1e-3)
    # sampling a quadratic: node subgradients tile the gradient image
    q = GridConvexFn([-1, -1], h, 0.5 * (X**2 + Y**2))
    m = ma_measure(q, box)
    assert m == pytest.approx(1.0, rel=0.15)
    assert ma_measure(q, box, method="raster") == pytest.approx(m, rel=1e-2)


def test_gradient_image_rank_one():
    f = euclidean_norm(1)
    img = gradient_image(f, [BorelBox((-1.0,), (-0.5,)), BorelBox((-0.1,), (0.1,))])
    assert img == [(-1.0, 1.0)]


# --- weighted identity --------------------------------------------------------


def test_weighted_identity_eguchi_hanson_random_boxes():
    rs = build_root_system("a1", {"l": 1})
    c = 1.0
    f = eguchi_hanson(c)
    rng = np.random.default_rng(7)
    for _ in range(20):
        lo, hi = np.sort(rng.uniform(0.1, 3.0, size=2))
        r = weighted_ma_identity_check(f, lambda z: f1_hat(rs, z), lambda z: f2_hat(rs, c, z), BorelBox((lo,), (hi,)))
        assert r <= 1e-6


def test_weighted_identity_two_dimensional():
    f = half_norm_sq()
    w = lambda z: 1.0 + z[..., 0] ** 2
    r = weighted_ma_identity_check(f, w, w, BorelBox((0, 0), (1, 2)))
    assert r <= 1e-12


def test_weighted_identity_escaping_grad_box():
    f = eguchi_hanson(1.0)
    with pytest.raises(QuadratureDomainError):
        weighted_ma_identity_check(
            f, lambda z: np.ones(z.shape[:-1]), lambda z: np.ones(z.shape[:-1]),
            BorelBox((0.0,), (3.0,)), grad_box=BorelBox((0.0,), (1.0,)),
        )


# --- serialisation ------------------------------------------------------------


@pytest.mark.parametrize("shape", [(7,), (5, 6)])
def test_grid_round_trip(shape):
    rng = np.random.default_rng(0)
    axes = [np.arange(n) * 0.1 for n in shape]
    mesh = np.meshgrid(*axes, indexing="ij")
    vals = sum(m**2 for m in mesh) + 1e-3 * rng.random()
    g = GridConvexFn([0.1] * len(shape), 0.1, vals)
    for back in (GridConvexFn.from_json(g.to_json()), GridConvexFn.from_csv(g.to_csv())):
        assert np.array_equal(back.values, g.values)
        assert np.array_equal(back.origin, g.origin) and back.h == g.h


def test_subgradient_set_basics():
    s = SubgradientSet.from_points([[0, 0], [1, 0], [0, 1], [0.2, 0.2]])
    assert len(s.vertices) == 3
    assert s.measure() == pytest.approx(0.5)
    lo, hi = s.bounds()
    assert np.allclose(lo, 0) and np.allclose(hi, 1)
    seg = SubgradientSet.from_points([[1.0], [3.0], [2.0]])
    assert seg.measure() == 2.0 and seg.contains([2.5]) and not seg.contains([3.5])


def test_eguchi_hanson_fixture_values():
    f = eguchi_hanson(4.0)
    x = np.linspace(-2, 2, 9)[:, None]
    assert np.allclose(f.value(x), eh_value(x[:, 0], 4.0))
