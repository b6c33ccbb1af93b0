import math

import numpy as np
import pytest
from hypothesis import example, given, settings
from hypothesis import strategies as st
from scipy import integrate

from minorantlab import catalog
from minorantlab.functional import (
    INF,
    CatalogError,
    Cone,
    Quadratic,
    alpha_mean,
    as_alpha,
    function_of_base,
    is_alpha_concave_on,
    phi,
    phi_inv,
)
from minorantlab.measure import total_mass

ALPHAS = [-0.5, 0.0, 0.5, 1.0, 2.0]


@pytest.mark.parametrize("alpha", ALPHAS)
def test_phi_roundtrip(alpha):
    y = np.array([1e-6, 0.1, 0.5, 0.9, 1.0])
    assert np.allclose(phi(alpha, phi_inv(alpha, y)), y, rtol=1e-13)


def test_phi_values():
    assert phi(0.0, 1.0) == pytest.approx(math.exp(-1))
    assert phi(1.0, 0.25) == pytest.approx(0.75)
    assert phi(1.0, 2.0) == 0.0
    assert phi(-1.0, 1.0) == pytest.approx(0.5)
    assert phi(INF, 0.0) == 1.0 and phi(INF, INF) == 0.0
    assert phi_inv(1.0, 0.0) == pytest.approx(1.0)
    assert phi_inv(0.0, 0.0) == INF


@given(st.floats(-0.9, 3.0), st.floats(1e-6, 1.0))
@example(alpha=2.2250738585e-313, y=0.875)
@example(alpha=-5e-324, y=1e-6)
def test_phi_inverse_property(alpha, y):
    # for alpha > 0 the base value sits near 1/alpha and carries eps / y**alpha relative error
    rel = 1e-12 * max(1.0, y ** (-alpha)) + 1e-13
    assert phi(alpha, phi_inv(alpha, y)) == pytest.approx(y, rel=rel)


def test_alpha_mean():
    assert alpha_mean(0, 0.5, 0.5, 1.0, 4.0) == pytest.approx(2.0)
    assert alpha_mean(1, 0.5, 0.5, 1.0, 4.0) == pytest.approx(2.5)
    assert alpha_mean(-1, 0.5, 0.5, 1.0, 4.0) == pytest.approx(1.6)
    assert alpha_mean("inf", 0.3, 0.7, 1.0, 4.0) == 4.0
    with pytest.raises(ValueError):
        alpha_mean(0, 0.5, 0.6, 1.0, 2.0)
    with pytest.raises(ValueError):
        alpha_mean(0, 0.5, 0.5, 0.0, 2.0)


def test_as_alpha():
    assert as_alpha("inf") == INF
    assert as_alpha(" Infinity ") == INF
    assert as_alpha(2) == 2.0
    with pytest.raises(ValueError):
        as_alpha(float("nan"))
    with pytest.raises(ValueError):
        as_alpha("-inf")


def _quad_mass(f):
    """Independent oracle: scipy quadrature of f itself."""
    if f.dim == 1:
        g = lambda x: f(np.array([x]))
        c = float(f.peak()[0])
        if f.alpha < 0:
            # heavy tails: integrate each half-line on its own
            return sum(integrate.quad(g, a, b, limit=500, epsabs=1e-13)[0] for a, b in ((-np.inf, c), (c, np.inf)))
        lo, hi = f.bounding_box(1e-18)
        v, _ = integrate.quad(g, lo[0], hi[0], points=[c], limit=500, epsabs=1e-13)
        return v
    # tensor Gauss-Legendre on the bounding box, fine enough for smooth integrands
    lo, hi = f.bounding_box(1e-18)
    z, w = np.polynomial.legendre.leggauss(400)
    xs = [0.5 * (hi[k] - lo[k]) * z + 0.5 * (hi[k] + lo[k]) for k in range(2)]
    ws = [0.5 * (hi[k] - lo[k]) * w for k in range(2)]
    X, Y = np.meshgrid(*xs, indexing="ij")
    vals = f(np.column_stack([X.ravel(), Y.ravel()])).reshape(X.shape)
    return float(ws[0] @ vals @ ws[1])


def _shoelace(v):
    x, y = v[:, 0], v[:, 1]
    return 0.5 * abs(float(x @ np.roll(y, -1) - y @ np.roll(x, -1)))


@pytest.mark.parametrize("name", ["gauss", "shifted_gauss", "laplace", "asym_cone", "tent", "skew_tent",
                                  "parabola", "interval", "student", "one_sided_exp"])
def test_catalog_mass_1d_against_quadrature(name):
    f = catalog.get(name)
    assert total_mass(f).value == pytest.approx(_quad_mass(f), rel=1e-7)


@pytest.mark.parametrize("name", ["gauss2", "sheared_gauss2", "shifted_gauss2"])
def test_catalog_mass_2d_against_quadrature(name):
    f = catalog.get(name)
    assert total_mass(f).value == pytest.approx(_quad_mass(f), rel=1e-9)


def test_quadratic_masses_by_hand():
    # polar coordinates: J = pi / sqrt(det Q) * int_0^inf phi(u) du
    det_p = 1.0 * 2.0 - 0.2**2
    assert total_mass(catalog.get("parabola2")).value == pytest.approx(math.pi / 2 / math.sqrt(det_p), rel=1e-14)
    # (1 + u/2)^(-2) integrates to 2
    assert total_mass(catalog.get("student2")).value == pytest.approx(2 * math.pi / math.sqrt(2.0), rel=1e-14)


def test_polyhedral_masses_against_geometry():
    tri = np.array([[-1.0, -0.5], [1.5, -0.3], [0.0, 1.0]])
    assert total_mass(catalog.get("skew_triangle")).value == pytest.approx(_shoelace(tri), rel=1e-14)
    # tent2 is a pyramid of height 1 over {max_j <a_j, x> <= 1}
    A = np.array([[1.0, 0.0], [-0.5, 1.0], [-0.5, -1.5]])
    verts = np.array([np.linalg.solve(A[[i, j]], np.ones(2)) for i, j in ((0, 1), (1, 2), (2, 0))])
    assert total_mass(catalog.get("tent2")).value == pytest.approx(_shoelace(verts) / 3.0, rel=1e-14)


def test_closed_form_masses():
    assert total_mass(catalog.get("gauss")).value == pytest.approx(math.sqrt(math.pi), rel=1e-14)
    assert total_mass(catalog.get("gauss2")).value == pytest.approx(math.pi, rel=1e-14)
    assert total_mass(catalog.get("cauchy")).value == pytest.approx(math.pi, rel=1e-14)
    assert total_mass(catalog.get("laplace")).value == pytest.approx(2.0, rel=1e-14)
    assert total_mass(catalog.get("tent")).value == pytest.approx(1.0, rel=1e-14)
    assert total_mass(catalog.get("unit_disk")).value == pytest.approx(math.pi, rel=1e-14)
    assert total_mass(catalog.get("skew_triangle")).value == pytest.approx(1.775, rel=1e-14)


def test_superlevel_volume_quadratic():
    f = catalog.get("sheared_gauss2")
    Q = np.array([[1.0, 0.8], [0.8, 1.5]])
    t = 0.3
    expected = math.pi * (-math.log(t)) / math.sqrt(np.linalg.det(Q))
    assert f.levelset_volume(t) == pytest.approx(expected, rel=1e-12)
    assert f.levelset_volume(2.0) == 0.0


def test_chord_matches_pointwise_evaluation():
    f = catalog.get("asym_cone2")
    u = np.array([0.6, 0.8])
    h = np.array([[0.3, -0.2]])
    t = 0.2
    lo, hi = f.chord(h, u, t)
    for tau in (lo[0], hi[0]):
        assert f(h[0] + tau * u) == pytest.approx(t, rel=1e-9)
    assert f(h[0] + 0.5 * (lo[0] + hi[0]) * u) > t


def test_chord_empty_above_max():
    f = catalog.get("gauss")
    lo, hi = f.chord(np.zeros((1, 1)), np.array([1.0]), 2.0)
    assert lo[0] > hi[0]


def test_indicator_evaluation():
    f = catalog.get("square")
    assert f(np.array([0.0, 0.0])) == 1.0
    assert f(np.array([0.6, 0.0])) == 0.0


def test_function_of_base_rejections():
    with pytest.raises(CatalogError):
        function_of_base(-0.5, Cone(slopes=[1.0, 1.0]))
    with pytest.raises(CatalogError):
        function_of_base(-1.0, Quadratic(np.eye(2)))
    with pytest.raises(CatalogError):
        function_of_base(INF, Quadratic(np.eye(1)))
    with pytest.raises(CatalogError):
        function_of_base(1.0, Quadratic(np.eye(1), center=[5.0]))


def test_catalog_json_errors():
    with pytest.raises(CatalogError):
        catalog.function_from_json({"alpha": 0, "kind": "banana", "params": {}})
    with pytest.raises(CatalogError):
        catalog.function_from_json({"kind": "quadratic"})
    with pytest.raises(CatalogError):
        catalog.get("no_such_function")


def test_catalog_roundtrip():
    for name in catalog.builtin_names():
        f = catalog.get(name)
        g = catalog.function_from_json(catalog.function_to_json(f))
        x = f.peak()[None, :] + 0.1
        assert np.allclose(f(x), g(x))


def test_alpha_concavity_holds():
    rng = np.random.default_rng(3)
    for name, alpha in (("gauss2", 0.0), ("parabola2", 1.0), ("student2", -0.5), ("asym_cone2", 0.0)):
        f = catalog.get(name)
        x = rng.normal(size=(50, 2)) * 0.5
        y = rng.normal(size=(50, 2)) * 0.5
        lam = rng.random(50)
        assert is_alpha_concave_on(f, alpha, x, y, lam) >= -1e-10


def test_grid_function_from_json(tmp_path):
    from minorantlab.grid import GridFunction

    xs = np.linspace(-4, 4, 401)
    grid = GridFunction([-4.0], [4.0], np.exp(-(xs**2)))
    path = tmp_path / "g.grid"
    grid.save(path)
    f = catalog.function_from_json({"alpha": 0, "kind": "grid", "params": {"path": str(path)}})
    assert f(np.array([0.5])) == pytest.approx(math.exp(-0.25), rel=1e-4)
    assert total_mass(f).value == pytest.approx(math.sqrt(math.pi), rel=1e-6)
