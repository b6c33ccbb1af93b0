"""Inner linearizations of convex functions and the induced alpha-affine minorants.

Given lifted points ``(x_i, t_i)`` above the graph of a convex base psi, the
inner linearization ``p`` is the lower convex envelope of the vertical rays
``{(x_i, t) : t >= t_i}``.  Its epigraph is the convex hull of those rays, its
domain is ``conv{x_i}`` and on each facet of the envelope it is affine.
Mapping ``p`` back through ``phi_alpha`` gives a minorant of ``f``.
"""

import json
import math
from collections import namedtuple

import numpy as np
from scipy.optimize import linprog

from . import kernels
from .functional import INF, alpha_to_json, phi, phi_inv
from .geometry import convex_hull_2d, polygon_halfspaces

EPI_TOL = 1e-9
DOMAIN_TOL = 1e-12


class DegenerateDomain(ValueError):
    """The x's lie in a common hyperplane and degenerate output was not allowed."""


class PointAboveGraph(ValueError):
    """A hypograph point lies above the graph of the host function."""


class ZeroHeight(ValueError):
    """A hypograph point has height 0; its epigraph image is at infinity."""


class NotInEpigraph(ValueError):
    """A lifted point lies below the graph of the base function."""


EpiPoint = namedtuple("EpiPoint", ["x", "t"])


class Facet:
    """A simplex of the domain triangulation with the affine map ``<a, x> + b`` on it."""

    __slots__ = ("indices", "vertices", "gradient", "offset")

    def __init__(self, indices, vertices, gradient, offset):
        self.indices = tuple(int(i) for i in indices)
        self.vertices = np.asarray(vertices, dtype=float)
        self.gradient = np.asarray(gradient, dtype=float)
        self.offset = float(offset)

    def values(self):
        return self.vertices @ self.gradient + self.offset

    def volume(self):
        v = self.vertices
        if len(v) == 2:
            return abs(float(v[1, 0] - v[0, 0]))
        e1, e2 = v[1] - v[0], v[2] - v[0]
        return 0.5 * abs(float(e1[0] * e2[1] - e1[1] * e2[0]))

    def to_json(self):
        return {
            "vertices": self.vertices.tolist(),
            "gradient": self.gradient.tolist(),
            "offset": self.offset,
        }


def _affine_through(x, t):
    """Gradient and offset of the affine map through ``n + 1`` lifted points."""
    n = x.shape[1]
    M = np.column_stack([x, np.ones(n + 1)])
    sol = np.linalg.solve(M, t)
    return sol[:n], sol[n]


class InnerLinearization:
    """Piecewise-affine convex function spanned by lifted points.

    Attributes
    ----------
    points, heights : ndarray
        Break points (extreme points of the epigraph), sorted lexicographically.
    inputs, input_heights : ndarray
        All distinct input x's with their smallest heights.
    facets : list of Facet
        Triangulation of the domain; empty when ``degenerate``.
    degenerate : bool
        True when the domain is lower dimensional (zero volume).
    """

    def __init__(self, inputs, input_heights, points, heights, facets, degenerate, line=None):
        self.inputs = inputs
        self.input_heights = input_heights
        self.points = points
        self.heights = heights
        self.facets = facets
        self.degenerate = degenerate
        self.dim = inputs.shape[1]
        # (origin, direction, sorted params, heights) for collinear 2D inputs
        self._line = line
        if self.dim == 2 and not degenerate:
            hull = convex_hull_2d(inputs)
            self._domain_vertices = inputs[hull]
            self._dom_A, self._dom_b = polygon_halfspaces(self._domain_vertices)
        if facets:
            self._grad = np.array([f.gradient for f in facets])
            self._off = np.array([f.offset for f in facets])

    def __repr__(self):
        return f"InnerLinearization(dim={self.dim}, break_points={len(self.points)}, facets={len(self.facets)})"

    @property
    def break_points(self):
        return [EpiPoint(x.copy(), float(t)) for x, t in zip(self.points, self.heights)]

    # -- domain ---------------------------------------------------------

    def domain_vertices(self):
        if self.dim == 1:
            return np.array([[self.inputs[:, 0].min()], [self.inputs[:, 0].max()]])
        if self.degenerate:
            return self.points.copy()
        return self._domain_vertices.copy()

    def domain_halfspaces(self):
        if self.dim == 1:
            lo, hi = self.inputs[:, 0].min(), self.inputs[:, 0].max()
            return np.array([[-1.0], [1.0]]), np.array([-lo, hi])
        return self._dom_A.copy(), self._dom_b.copy()

    def domain_volume(self):
        if self.degenerate:
            return 0.0
        return math.fsum(f.volume() for f in self.facets)

    def in_domain(self, x):
        x = np.asarray(x, dtype=float).reshape(-1, self.dim)
        scale = 1.0 + float(np.max(np.abs(self.inputs)))
        tol = DOMAIN_TOL * scale
        if self.dim == 1:
            return (x[:, 0] >= self.inputs[:, 0].min() - tol) & (x[:, 0] <= self.inputs[:, 0].max() + tol)
        if not self.degenerate:
            return np.all(x @ self._dom_A.T - self._dom_b <= tol, axis=1)
        if self._line is None:
            return np.all(np.abs(x - self.points[0]) <= tol, axis=1)
        origin, d, s, _ = self._line
        rel = x - origin
        along = rel @ d
        off = np.abs(rel[:, 0] * d[1] - rel[:, 1] * d[0])
        return (off <= tol) & (along >= s[0] - tol) & (along <= s[-1] + tol)

    # -- evaluation -----------------------------------------------------

    def evaluate(self, x):
        """Facet evaluation: ``p(x)`` with ``+inf`` outside the domain."""
        x = np.asarray(x, dtype=float).reshape(-1, self.dim)
        inside = self.in_domain(x)
        out = np.full(len(x), INF)
        if not np.any(inside):
            return out
        xi = x[inside]
        if self.facets:
            # a convex piecewise-affine function is the max of its facet maps on its domain
            out[inside] = np.max(xi @ self._grad.T + self._off, axis=1)
        elif self.dim == 1 or self._line is None:
            out[inside] = self.heights[0]
        else:
            origin, d, s, ts = self._line
            out[inside] = np.interp((xi - origin) @ d, s, ts)
        return out

    __call__ = evaluate

    def to_json(self):
        return {
            "dim": self.dim,
            "degenerate": self.degenerate,
            "break_points": [list(map(float, x)) + [float(t)] for x, t in zip(self.points, self.heights)],
            "facets": [f.to_json() for f in self.facets],
        }


def _as_arrays(points):
    if (
        isinstance(points, tuple)
        and len(points) == 2
        and isinstance(points[0], np.ndarray)
        and isinstance(points[1], np.ndarray)
    ):
        x, t = points
    else:
        pts = list(points)
        if not pts:
            raise ValueError("need at least one point")
        x = [np.atleast_1d(np.asarray(p[0], dtype=float)) for p in pts]
        t = [float(p[1]) for p in pts]
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    t = np.asarray(t, dtype=float).reshape(-1)
    if len(x) != len(t) or len(x) == 0:
        raise ValueError("need matching, nonempty x and t")
    if not np.all(np.isfinite(x)) or not np.all(np.isfinite(t)):
        raise ValueError("points must be finite")
    return x, t


def inner_linearization(points, psi=None, allow_degenerate=True):
    """Lower convex envelope of the vertical rays above lifted points.

    Parameters
    ----------
    points : iterable of (x, t) or tuple ``(X, T)`` of arrays
        Lifted points; duplicate x's keep the smallest t.
    psi : callable, optional
        Base function; when given every point must lie in its epigraph
        up to ``1e-9`` relative.
    allow_degenerate : bool
        Accept inputs whose x's do not span the plane.
    """
    x, t = _as_arrays(points)
    if psi is not None:
        base = np.asarray(psi(x), dtype=float).reshape(-1)
        fin = np.isfinite(base)
        bad = ~fin | (t < base - EPI_TOL * (1.0 + np.abs(np.where(fin, base, 0.0))))
        if np.any(bad):
            raise NotInEpigraph(f"point {x[np.argmax(bad)].tolist()} lies below the graph of the base")
    xu, tu = kernels.dedupe(x, t)
    dim = xu.shape[1]
    if dim == 1:
        return _linearization_1d(xu, tu)
    if dim != 2:
        raise ValueError("only dimensions 1 and 2 are supported")
    faces = kernels.lower_faces_2d(xu, tu) if len(xu) >= 3 else np.zeros((0, 3), dtype=np.int64)
    if len(faces) == 0:
        if not allow_degenerate:
            raise DegenerateDomain("the points are collinear")
        return _linearization_collinear(xu, tu)
    used = sorted(set(int(i) for i in faces.reshape(-1)))
    remap = {old: new for new, old in enumerate(used)}
    bp, bt = xu[used], tu[used]
    facets = []
    for tri in faces:
        v = xu[list(tri)]
        a, b = _affine_through(v, tu[list(tri)])
        facets.append(Facet([remap[int(i)] for i in tri], v, a, b))
    return InnerLinearization(xu, tu, bp, bt, facets, False)


def _linearization_1d(xu, tu):
    xs = xu[:, 0]
    idx = kernels.lower_hull_1d(xs, tu) if len(xs) > 1 else np.array([0])
    bp, bt = xu[idx], tu[idx]
    facets = []
    for k in range(len(idx) - 1):
        a, b = idx[k], idx[k + 1]
        slope = (tu[b] - tu[a]) / (xs[b] - xs[a])
        facets.append(Facet([k, k + 1], xu[[a, b]], [slope], tu[a] - slope * xs[a]))
    return InnerLinearization(xu, tu, bp, bt, facets, len(idx) < 2)


def _linearization_collinear(xu, tu):
    if len(xu) == 1:
        return InnerLinearization(xu, tu, xu.copy(), tu.copy(), [], True)
    origin = xu[0]
    far = np.argmax(np.sum((xu - origin) ** 2, axis=1))
    d = xu[far] - origin
    d = d / np.linalg.norm(d)
    s = (xu - origin) @ d
    order = np.argsort(s, kind="stable")
    s, xs, ts = s[order], xu[order], tu[order]
    idx = kernels.lower_hull_1d(s, ts)
    line = (origin, d, s[idx], ts[idx])
    return InnerLinearization(xu, tu, xs[idx], ts[idx], [], True, line=line)


def break_points(p):
    """Extreme points of ``epi(p)`` as EpiPoints."""
    return p.break_points


def eval_linearization_facets(p, x):
    out = p.evaluate(x)
    return float(out[0]) if np.asarray(x).size == p.dim else out


def eval_linearization_lp(points, x):
    """``min{sum l_i t_i : sum l_i = 1, l >= 0, sum l_i x_i = x}``; ``+inf`` when infeasible.

    Solved with HiGHS; the objective is then recomputed from the basis by a
    direct solve so the value carries no solver tolerance.
    """
    X, T = _as_arrays(points)
    x = np.atleast_1d(np.asarray(x, dtype=float)).reshape(-1)
    A_eq = np.vstack([np.ones(len(X)), X.T])
    b_eq = np.concatenate([[1.0], x])
    res = linprog(
        T,
        A_eq=A_eq,
        b_eq=b_eq,
        bounds=(0, None),
        method="highs-ds",
        options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10},
    )
    if res.status == 2:
        return INF
    if res.status != 0:
        raise RuntimeError(f"LP solver failed: {res.message}")
    lam = res.x
    support = np.nonzero(lam > 1e-12)[0]
    if 0 < len(support) <= len(x) + 1:
        sol, *_ = np.linalg.lstsq(A_eq[:, support], b_eq, rcond=None)
        if np.all(sol >= -1e-12) and np.allclose(A_eq[:, support] @ sol, b_eq, rtol=0, atol=1e-12):
            return float(T[support] @ sol)
    return float(res.fun)


# --------------------------------------------------------------------------
# minorants


class AlphaMinorant:
    """``q = scale * phi_alpha(p)`` for an inner linearization ``p``; 0 off its domain."""

    def __init__(self, alpha, linearization, host=None, scale=1.0, hypo_points=None):
        self.alpha = alpha
        self.linearization = linearization
        self.host = host
        self.scale = float(scale)
        self.hypo_points = hypo_points
        self.dim = linearization.dim

    def __repr__(self):
        return f"AlphaMinorant(alpha={self.alpha!r}, break_points={self.break_point_count})"

    @property
    def break_point_count(self):
        return len(self.linearization.points)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        single = x.ndim <= 1 and x.size == self.dim
        vals = self.linearization.evaluate(x.reshape(-1, self.dim))
        out = self.scale * np.asarray(phi(self.alpha, vals), dtype=float).reshape(-1)
        return float(out[0]) if single else out

    def hypograph_points(self):
        """Break points mapped back to ``(x, y)`` with ``y = q(x)``."""
        y = self.scale * np.asarray(phi(self.alpha, self.linearization.heights), dtype=float)
        return self.linearization.points.copy(), y.reshape(-1)

    def to_json(self):
        x, y = self.hypograph_points()
        out = {
            "alpha": alpha_to_json(self.alpha),
            "scale": self.scale,
            "hypograph_points": [list(map(float, xi)) + [float(yi)] for xi, yi in zip(x, y)],
        }
        out.update(self.linearization.to_json())
        return out

    def dump(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=1)


def alpha_minorant_from_points(f, hypo_points, check=True, allow_degenerate=True):
    """Minorant of ``f`` spanned by hypograph points ``(x, y)``, ``0 < y <= f(x)``.

    For ``0 < alpha < inf`` a point with ``y = 0`` is accepted: it lifts to
    the finite base level ``1/alpha``.
    """
    x, y = _as_arrays(hypo_points)
    if np.any(y < 0.0) or (np.any(y == 0.0) and not 0 < f.alpha < INF):
        # y = 0 lifts to +inf unless 0 < alpha < inf, where it lifts to 1/alpha
        raise ZeroHeight("hypograph points must have positive height")
    if check:
        fx = np.asarray(f(x), dtype=float).reshape(-1)
        above = y > fx * (1.0 + EPI_TOL)
        if np.any(above):
            k = int(np.argmax(above))
            raise PointAboveGraph(f"point {x[k].tolist()} at height {y[k]!r} is above f = {fx[k]!r}")
    if f.alpha == INF:
        scale = float(np.min(y))
        t = np.zeros(len(y))
    else:
        scale = 1.0
        t = np.asarray(phi_inv(f.alpha, y), dtype=float).reshape(-1)
        if f.alpha > 0:
            # y <= f(x) <= 1 keeps t finite, rounding may push it just below 0
            t = np.minimum(t, 1.0 / f.alpha)
    lin = inner_linearization((x, t), allow_degenerate=allow_degenerate)
    return AlphaMinorant(f.alpha, lin, host=f, scale=scale, hypo_points=(x, y))
