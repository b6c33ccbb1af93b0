"""Masses of functions and minorants.

Minorant masses are exact: each facet integral of ``phi_alpha(<a, x> + b)``
has a closed form (divided differences of antiderivatives, Taylor series near
coincident vertex values, clipping at the support boundary for alpha > 0).
Catalog functions have closed-form masses; everything else goes through the
layer-cake formula or a dyadic quadrature with a Richardson error estimate.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from ._affine_integrals import clipped_triangle_integral, segment_integral
from .functional import INF, TabulatedRadial, phi

EXACT = "Exact"
QUADRATURE = "Quadrature"
LAYER_CAKE = "LayerCake"
EXACT_REL = 1e-13


class DegenerateSimplex(ValueError):
    """The simplex has zero volume."""


@dataclass(frozen=True)
class MassResult:
    """A mass with an absolute error bound and the method that produced it."""

    value: float
    error_bound: float
    method: str

    def to_json(self):
        return {"value": self.value, "errorBound": self.error_bound, "method": self.method}


def _exact(value):
    return MassResult(float(value), float(EXACT_REL * (1.0 + abs(value))), EXACT)


class Simplex:
    """A segment (n = 1) or triangle (n = 2)."""

    def __init__(self, vertices, allow_degenerate=False):
        v = np.asarray(vertices, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.shape[0] != v.shape[1] + 1 or v.shape[1] not in (1, 2):
            raise ValueError("a simplex in R^n needs n + 1 vertices, n in {1, 2}")
        self.vertices = v
        self.dim = v.shape[1]
        if not allow_degenerate and self.volume() <= 0.0:
            raise DegenerateSimplex("simplex has zero volume")

    def volume(self):
        v = self.vertices
        if self.dim == 1:
            return abs(float(v[1, 0] - v[0, 0]))
        e1, e2 = v[1] - v[0], v[2] - v[0]
        return 0.5 * abs(float(e1[0] * e2[1] - e1[1] * e2[0]))


def mass_affine_piece(alpha, simplex, gradient, offset):
    """Exact ``int_simplex phi_alpha(<a, x> + b) dx``."""
    if not isinstance(simplex, Simplex):
        simplex = Simplex(simplex)
    if simplex.volume() <= 0.0:
        raise DegenerateSimplex("simplex has zero volume")
    a = np.asarray(gradient, dtype=float).reshape(-1)
    vals = simplex.vertices @ a + float(offset)
    if alpha < 0 and float(np.min(vals)) <= 1.0 / alpha:
        # phi_alpha blows up as its argument falls to 1/alpha; the integral is not finite
        raise ValueError("the affine map reaches 1/alpha on the simplex, where phi_alpha is unbounded")
    return _exact(_piece(alpha, simplex.vertices, vals))


def _piece(alpha, v, vals):
    if alpha == INF:
        return Simplex(v, allow_degenerate=True).volume()
    if len(v) == 2:
        return segment_integral(alpha, abs(float(v[1, 0] - v[0, 0])), float(vals[0]), float(vals[1]))
    return clipped_triangle_integral(alpha, tuple(v[0]), tuple(v[1]), tuple(v[2]), *map(float, vals))


def linearization_mass(alpha, lin):
    """Exact mass of ``phi_alpha(p)``; facets summed with ``math.fsum`` in facet order."""
    if lin.degenerate:
        return 0.0
    return math.fsum(_piece(alpha, f.vertices, f.values()) for f in lin.facets)


def minorant_mass(q):
    """Exact mass of an alpha-affine minorant."""
    if q.alpha == INF:
        return _exact(q.scale * q.linearization.domain_volume())
    return _exact(q.scale * linearization_mass(q.alpha, q.linearization))


def total_mass(f, method=None):
    """``J(f)``: closed form when available, box rule on grids, layer cake otherwise."""
    if method in (None, EXACT):
        exact = f.exact_mass() if hasattr(f, "exact_mass") else None
        if exact is not None:
            return _exact(exact)
        if method == EXACT:
            raise ValueError("no closed-form mass for this function")
    grid = getattr(f.base, "grid", None) if hasattr(f, "base") else None
    if method in (None, QUADRATURE) and grid is not None:
        value, bound = grid.mass()
        return MassResult(value, bound, QUADRATURE)
    if method in (None, QUADRATURE) and isinstance(getattr(f, "base", None), TabulatedRadial):
        b = f.base
        value = math.fsum(b.sorted_values) * b.cell_volume
        return MassResult(value, getattr(b, "source_error", 0.0), QUADRATURE)
    if method == QUADRATURE:
        lo, hi = f.bounding_box()
        value, err = adaptive_quadrature(f, lo, hi)
        return MassResult(value, err, QUADRATURE)
    return layer_cake_mass(f)


def layer_cake_mass(f):
    """``J(f) = int_0^max vol{f >= t} dt``, integrated over base levels.

    With ``t = phi(s)`` this is ``int vol{psi <= s} (-phi'(s)) ds`` from
    ``min psi`` to the top of the support.
    """
    if f.alpha == INF:
        return MassResult(f.height * f.base.sublevel_volume(0.0), 0.0, LAYER_CAKE)
    a = f.alpha
    smin = f.base.min_value()
    smax = 1.0 / a if a > 0 else INF

    def dphi(s):
        if a == 0.0:
            return math.exp(-s)
        return max(1.0 - a * s, 0.0) ** (1.0 / a - 1.0)

    if f.base.is_indicator:
        return MassResult(phi(a, smin) * f.base.sublevel_volume(smin), 0.0, LAYER_CAKE)
    value, err = integrate.quad(
        lambda s: f.base.sublevel_volume(s) * dphi(s), smin, smax, epsabs=1e-14, epsrel=1e-12, limit=400
    )
    return MassResult(float(value), float(err), LAYER_CAKE)


def levelset_volume(f, t, with_error=False):
    """``vol{f >= t}``; grid masks also report their half-cell error bound."""
    if t <= 0:
        raise ValueError("level must be positive")
    if t > f.max_value() * (1 + 1e-15):
        return (0.0, 0.0) if with_error else 0.0
    s = f.superlevel_set(t)
    value = s.volume()
    if not with_error:
        return value
    bound = s.volume_error() if hasattr(s, "volume_error") else EXACT_REL * (1.0 + value)
    return value, bound


# --------------------------------------------------------------------------
# quadrature


def adaptive_quadrature(func, lo, hi, tol=1e-8, max_level=None, min_level=4):
    """Dyadic trapezoid refinement on a box with a Richardson error estimate.

    Doubles the number of cells per axis until the estimate stays below
    ``tol`` (absolute) for two refinements in a row or ``max_level`` is
    reached.  ``func`` takes an (m, n)
    array of points.  Returns ``(value, error_estimate)``.
    """
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    n = lo.size
    if max_level is None:
        max_level = 20 if n == 1 else 10
    prev = None
    value, err = 0.0, INF
    calm = 0
    for level in range(min_level, max_level + 1):
        k = 2**level + 1
        axes = [np.linspace(lo[d], hi[d], k) for d in range(n)]
        w1 = np.full(k, 1.0)
        w1[0] = w1[-1] = 0.5
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([m.reshape(-1) for m in mesh], axis=1)
        vals = np.asarray(func(pts), dtype=float).reshape((k,) * n)
        for d in range(n):
            shape = [1] * n
            shape[d] = k
            vals = vals * w1.reshape(shape)
        trap = float(np.sum(vals)) * float(np.prod((hi - lo) / (k - 1)))
        if prev is not None:
            err = abs(trap - prev) / 3.0
            value = trap + (trap - prev) / 3.0
            # two quiet refinements in a row: one can be a lucky coincidence
            # for integrands with jumps
            calm = calm + 1 if err < tol else 0
            if calm >= 2:
                break
        else:
            value = trap
        prev = trap
    return value, err


def _box_of(f):
    box = f.bounding_box() if hasattr(f, "bounding_box") else None
    if box is None:
        return None
    return np.asarray(box[0], dtype=float), np.asarray(box[1], dtype=float)


def lp_distance(f, g, p=1.0, box=None, tol=1e-8, max_level=None):
    """``(int |f - g|^p)^(1/p)`` over the union of supports.

    One dimension uses adaptive Gauss-Kronrod (scipy ``quad``), two the
    dyadic trapezoid rule above.

    Returns ``(value, error_estimate)``; the estimate bounds the error of the
    integral of ``|f - g|^p``.
    """
    if p < 1:
        raise ValueError("p must be at least 1")
    if f.dim != g.dim:
        raise ValueError("dimension mismatch")
    if box is None:
        boxes = [b for b in (_box_of(f), _box_of(g)) if b is not None]
        if not boxes:
            return 0.0, 0.0
        lo = np.min([b[0] for b in boxes], axis=0)
        hi = np.max([b[1] for b in boxes], axis=0)
        pad = 1e-3 * np.maximum(hi - lo, 1e-12)
        box = (lo - pad, hi + pad)
    lo, hi = box

    def integrand(x):
        return np.abs(np.asarray(f(x), float) - np.asarray(g(x), float)) ** p

    if f.dim == 1:
        # globally adaptive Gauss-Kronrod copes with the jumps of indicators
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            value, err = integrate.quad(
                lambda z: float(integrand(np.array([[z]]))[0]), float(lo[0]), float(hi[0]),
                epsabs=tol, epsrel=0.0, limit=2000,
            )
    else:
        value, err = adaptive_quadrature(integrand, lo, hi, tol=tol, max_level=max_level)
    return max(value, 0.0) ** (1.0 / p), err


def tail_mass(f, s):
    """Mass of f outside ``{psi <= s}``: ``int_s^inf (V(r) - V(s)) (-phi'(r)) dr``."""
    a = f.alpha
    if a == INF or f.base.is_indicator or (a > 0 and s >= 1.0 / a):
        return 0.0
    vs = f.base.sublevel_volume(s)
    top = 1.0 / a if a > 0 else INF

    def integrand(r):
        d = math.exp(-r) if a == 0.0 else max(1.0 - a * r, 0.0) ** (1.0 / a - 1.0)
        return (f.base.sublevel_volume(r) - vs) * d

    with warnings.catch_warnings():
        # slowly decaying alpha < 0 tails trip quad's extrapolation warnings;
        # the value is only used against a relative threshold
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        value, _ = integrate.quad(integrand, s, top, epsabs=1e-300, epsrel=1e-8, limit=400)
    return max(float(value), 0.0)


def support_level(f, tail_rel=None):
    """Base level ``S`` with mass outside ``{psi <= S}`` at most ``tail_rel * J(f)``.

    Returns ``(S, tail)``.  The default tolerance is 1e-10 for alpha >= 0 and
    1e-4 for the polynomially decaying alpha < 0 case.
    """
    a = f.alpha
    smin = f.base.min_value()
    if a == INF or f.base.is_indicator:
        return smin, 0.0
    if a > 0:
        return 1.0 / a, 0.0
    if tail_rel is None:
        tail_rel = 1e-10 if a == 0 else 1e-4
    target = tail_rel * total_mass(f).value
    step = 1.0
    while True:
        s = smin + step
        tail = tail_mass(f, s)
        if tail <= target:
            return s, tail
        step *= 2.0
