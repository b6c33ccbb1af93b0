import subprocess
import sys
import textwrap

import numpy as np
import pytest

from minorantlab import _affine_integrals, _pykernels, kernels

needs_cython = pytest.mark.skipif("cython" not in kernels.BACKENDS, reason="compiled extension not built")


def _cases(rng, dim, count):
    for _ in range(count):
        k = int(rng.integers(2, 10))
        x = rng.uniform(-1, 1, (k, dim))
        t = rng.uniform(0, 1.5, k)
        # a few repeated points exercise the dedupe path
        if k > 3:
            x[1] = x[0]
        yield x, t


@needs_cython
@pytest.mark.parametrize("alpha", [-0.5, 0.0, 0.5, 1.0, 2.0])
@pytest.mark.parametrize("dim", [1, 2])
def test_backends_agree_on_mass(alpha, dim):
    c = kernels.BACKENDS["cython"]
    rng = np.random.default_rng(dim * 100 + int(alpha * 10))
    for x, t in _cases(rng, dim, 60):
        if alpha > 0:
            t = np.minimum(t, 1.0 / alpha)
        fn = "mass_1d" if dim == 1 else "mass_2d"
        a = getattr(c, fn)(x, t, alpha)
        b = getattr(_pykernels, fn)(x, t, alpha)
        assert a == pytest.approx(b, rel=1e-12, abs=1e-15)


@needs_cython
def test_backends_agree_on_hulls():
    c = kernels.BACKENDS["cython"]
    rng = np.random.default_rng(9)
    for x, t in _cases(rng, 1, 50):
        assert np.array_equal(np.asarray(c.lower_hull_1d(x[:, 0], t)), np.asarray(_pykernels.lower_hull_1d(x[:, 0], t)))
    for x, t in _cases(rng, 2, 50):
        xa, ta = c.dedupe(x, t)
        xb, tb = _pykernels.dedupe(x, t)
        assert np.array_equal(xa, xb) and np.array_equal(ta, tb)
        fa = sorted(tuple(sorted(f)) for f in c.lower_faces_2d(xa, ta))
        fb = sorted(tuple(sorted(f)) for f in _pykernels.lower_faces_2d(xb, tb))
        assert fa == fb


@needs_cython
def test_backends_agree_on_pieces():
    c = kernels.BACKENDS["cython"]
    rng = np.random.default_rng(12)
    for alpha in (-0.5, 0.0, 1.0):
        for _ in range(100):
            u, v, w = rng.uniform(0, 0.9, 3)
            p = rng.uniform(-1, 1, (3, 2))
            L = rng.uniform(0.1, 2)
            assert c.segment_integral(alpha, L, u, v) == pytest.approx(
                _affine_integrals.segment_integral(alpha, L, u, v), rel=1e-13, abs=1e-16
            )
            assert c.clipped_triangle_integral(alpha, p[0], p[1], p[2], u, v, w) == pytest.approx(
                _affine_integrals.clipped_triangle_integral(alpha, p[0], p[1], p[2], u, v, w), rel=1e-13, abs=1e-16
            )


def test_use_backend_switches_and_restores():
    start = kernels.BACKEND
    try:
        kernels.use_backend("python")
        assert kernels.BACKEND == "python"
        x = np.array([[-1.0], [0.0], [1.0]])
        t = np.array([1.0, 0.0, 1.0])
        # phi_0 over two unit segments with base rising 0 -> 1
        assert kernels.minorant_mass(x, t, 0.0) == pytest.approx(2 * (1 - np.exp(-1)), rel=1e-14)
        with pytest.raises(ValueError):
            kernels.use_backend("fortran")
    finally:
        kernels.use_backend(start)


def test_fallback_when_extension_missing():
    code = textwrap.dedent(
        """
        import sys
        class Block:
            def find_spec(self, name, path=None, target=None):
                if name == "minorantlab._ckernels":
                    raise ImportError("blocked")
        sys.meta_path.insert(0, Block())
        import minorantlab
        from minorantlab import kernels
        assert minorantlab.BACKEND == "python", minorantlab.BACKEND
        assert set(kernels.BACKENDS) == {"python"}
        from minorantlab import catalog, best_minorant, OptimizerConfig
        sol = best_minorant(catalog.get("unit_disk"), 4, OptimizerConfig(restarts=2))
        print(round(sol.mass.value, 6))
        """
    )
    out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, check=True)
    assert float(out.stdout.strip()) == pytest.approx(2.0, abs=1e-3)
