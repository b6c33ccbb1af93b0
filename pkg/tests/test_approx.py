import math
import zlib

import numpy as np
import pytest

from minorantlab import catalog
from minorantlab.approx import (
    BudgetExceeded,
    InvalidN,
    OptimizerConfig,
    PointOutsideSymmetral,
    best_minorant,
    brute_force_minorant,
    g_functional,
    macbeath_pair,
    random_admissible_points,
    steiner_monotonicity_check,
)
from minorantlab.measure import total_mass
from minorantlab.symmetry import Hyperplane

FAST = OptimizerConfig(restarts=8, maxIterations=300)


def _polygon(k):
    return (k / 2) * math.sin(2 * math.pi / k)


def test_invalid_n():
    f = catalog.get("gauss")
    for bad in (0, -1, 2.5):
        with pytest.raises(InvalidN):
            best_minorant(f, bad)
    with pytest.raises(InvalidN):
        brute_force_minorant(f, 0)
    with pytest.raises(ValueError):
        OptimizerConfig(restarts=0)


def test_unit_disk_hexagon():
    sol = best_minorant(catalog.get("unit_disk"), 6, FAST)
    assert sol.mass.value == pytest.approx(_polygon(6), abs=1e-3)
    assert sol.breakPointCount <= 6


def test_square_is_its_own_polytope():
    f = catalog.get("square")
    sol = best_minorant(f, 4, FAST)
    assert sol.mass.value == pytest.approx(1.0, abs=1e-9)
    G, gap, _ = g_functional(f, 4, FAST, solution=sol)
    assert abs(G) <= gap + 1e-9


def test_laplace_three_points_matches_brute_force():
    f = catalog.get("laplace")
    ref = brute_force_minorant(f, 3, gridResolution=101)
    sol = best_minorant(f, 3, FAST)
    assert sol.mass.value == pytest.approx(ref.mass.value, abs=1e-4)


def test_brute_force_examples():
    f = catalog.function_from_json(
        {"alpha": "inf", "kind": "indicator_polytope", "params": {"vertices": [[-1.0], [1.0]]}}
    )
    assert brute_force_minorant(f, 2).mass.value == pytest.approx(2.0)
    assert brute_force_minorant(catalog.get("gauss"), 1).mass.value == 0.0
    assert best_minorant(catalog.get("gauss"), 1, FAST).mass.value == 0.0
    with pytest.raises(BudgetExceeded):
        brute_force_minorant(catalog.get("gauss2"), 4, gridResolution=101)


def test_brute_force_two_points_laplace():
    # the peak plus one far point: the minorant is e^{-x} on [0, a], mass 1 - e^{-a} with a at the box edge,
    # beating the symmetric pair +-1 (mass 2/e)
    sol = brute_force_minorant(catalog.get("laplace"), 2)
    assert 1.0 - 1e-6 <= sol.mass.value <= 1.0
    xs, _ = sol.points
    assert 0.0 in xs[:, 0]


def test_mass_bounded_by_total():
    for name in ("gauss", "asym_cone2", "skew_triangle", "student"):
        f = catalog.get(name)
        sol = best_minorant(f, 4, FAST)
        J = total_mass(f)
        assert sol.mass.value <= J.value + J.error_bound + sol.mass.error_bound
        assert sol.optimizerGap >= 0


def test_monotone_in_n():
    f = catalog.get("gauss2")
    prev = None
    for N in range(3, 7):
        sol = best_minorant(f, N, FAST, warm_start=None if prev is None else prev.points[0])
        if prev is not None:
            assert sol.mass.value >= prev.mass.value - 1e-12
        prev = sol


def test_seed_determinism():
    f = catalog.get("sheared_gauss2")
    a = best_minorant(f, 4, OptimizerConfig(restarts=6, seed=3))
    b = best_minorant(f, 4, OptimizerConfig(restarts=6, seed=3))
    assert a.mass.value == b.mass.value
    assert np.array_equal(a.points[0], b.points[0])
    assert a.to_json()["seed"] == 3


def test_gaussian_g_reproducible_across_seeds():
    f = catalog.get("gauss")
    vals = [g_functional(f, 4, OptimizerConfig(restarts=8, seed=s)) for s in (0, 1, 2)]
    spread = max(v[0] for v in vals) - min(v[0] for v in vals)
    assert spread <= max(v[1] for v in vals) + 1e-9


def test_g_functional_disk():
    G, gap, _ = g_functional(catalog.get("unit_disk"), 6, FAST)
    assert G == pytest.approx(math.pi - _polygon(6), abs=1e-3)
    assert G >= -gap


def test_free_heights_never_better():
    f = catalog.get("gauss")
    sol = brute_force_minorant(f, 3, gridResolution=21, free_heights=2, zoom_levels=0)
    lifted = sol.trace[-1]["lifted"]
    assert not any(lifted)


def test_macbeath_symmetric_zero_offsets():
    f = catalog.get("gauss2")
    H = Hyperplane([0.0, 1.0])
    pts = [([x, 0.0], y) for x, y in ((-1.0, 0.2), (0.0, 0.9), (1.0, 0.3))]
    pair = macbeath_pair(f, H, pts)
    a, _ = pair.q.hypograph_points()
    b, _ = pair.r.hypograph_points()
    assert np.allclose(a, b)
    assert pair.mass_q.value == pytest.approx(pair.mass_r.value, rel=1e-14)


def test_macbeath_indicator_half_heights():
    f = catalog.get("skew_triangle")
    H = Hyperplane([1.0, 0.0])
    rng = np.random.default_rng(4)
    pts = random_admissible_points(f, H, 5, rng)
    pair = macbeath_pair(f, H, pts)
    assert pair.holds()
    # the three domains share their projection onto H (the y-axis)
    ys = np.array([p[0][1] for p in pts])
    for m in (pair.p, pair.q, pair.r):
        xs, _ = m.hypograph_points()
        assert (xs[:, 1].min(), xs[:, 1].max()) == pytest.approx((ys.min(), ys.max()), abs=1e-12)


def test_point_outside_symmetral():
    f = catalog.get("gauss")
    H = Hyperplane([1.0])
    with pytest.raises(PointOutsideSymmetral):
        macbeath_pair(f, H, [([2.0], 0.5)])
    with pytest.raises(PointOutsideSymmetral):
        macbeath_pair(f, H, [([0.0], 1.5)])
    with pytest.raises(PointOutsideSymmetral):
        macbeath_pair(f, H, [([0.0], -0.1)])


@pytest.mark.parametrize("name,alpha", [("shifted_gauss", 0), ("skew_tent", 1), ("student", -0.5),
                                        ("asym_cone2", 0), ("parabola2", 1), ("student2", -0.5)])
def test_macbeath_certificate_and_containment(name, alpha):
    f = catalog.get(name)
    assert f.alpha == alpha
    rng = np.random.default_rng(zlib.crc32(name.encode()))
    for trial in range(4):
        H = Hyperplane(rng.normal(size=f.dim))
        pts = random_admissible_points(f, H, 3 + trial, rng)
        pair = macbeath_pair(f, H, pts)
        assert pair.holds()
        z = f.peak()[None, :] + rng.normal(size=(1000, f.dim))
        fz = f(z)
        for m in (pair.q, pair.r):
            assert np.all(m(z) <= fz * (1 + 1e-9) + 1e-300)


def test_monotonicity_check_shifted_gaussian():
    rep = steiner_monotonicity_check(catalog.get("shifted_gauss"), Hyperplane([1.0]), 4, FAST)
    assert rep["certificate_ok"]
    assert rep["bestmass_f"] >= rep["bestmass_sym"] - rep["gap"] - rep["bound"]


def test_monotonicity_check_triangle():
    rep = steiner_monotonicity_check(catalog.get("skew_triangle"), Hyperplane([0.6, 0.8]), 5, FAST)
    assert rep["certificate_ok"]


def test_monotonicity_check_symmetric_function():
    rep = steiner_monotonicity_check(catalog.get("gauss2"), Hyperplane([0.0, 1.0]), 4, FAST)
    assert rep["certificate_ok"]
    assert rep["J_q"] >= rep["J_p"] - rep["bound"]


def test_solution_json():
    sol = best_minorant(catalog.get("laplace"), 3, FAST)
    d = sol.to_json()
    assert {"mass", "breakPointCount", "optimizerGap", "seed", "minorant", "trace"} <= set(d)
    assert len(d["trace"]) == FAST.restarts
