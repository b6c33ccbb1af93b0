"""Alpha-concave function models.

An alpha-concave function is written through its convex base function psi as

    f = (1 - alpha * psi)_+ ** (1 / alpha)     (alpha != 0)
    f = exp(-psi)                              (alpha == 0)
    f = height * 1_K                           (alpha == +inf, psi = indicator of K)

Base functions come in a few concrete kinds with exact level-set and chord
queries (quadratic, polyhedral cone, polytope/ellipsoid indicators, inner
linearizations) plus sampled fallbacks (grids and tabulated radial profiles).
"""

import math

import numpy as np
from scipy import special

from .geometry import convex_hull_2d, halfspace_polygon, line_halfspace_interval, polygon_area
from .sets import Ball, Ellipse, EmptySet, GridMask, Interval, Polygon, ball_volume

INF = math.inf
WEIGHT_TOL = 1e-12


class CatalogError(ValueError):
    """A function description is invalid or outside the supported class."""


def as_alpha(value):
    """Parse an alpha parameter: a real number or ``"inf"`` for +infinity."""
    if isinstance(value, str):
        if value.strip().lower() in ("inf", "+inf", "infinity"):
            return INF
        value = float(value)
    value = float(value)
    if math.isnan(value):
        raise ValueError("alpha must not be NaN")
    if value == -INF:
        raise ValueError("alpha = -inf (quasiconcave case) is not supported")
    return value


def alpha_to_json(alpha):
    return "inf" if alpha == INF else alpha


def alpha_mean(alpha, s, t, u, v):
    """Weighted alpha-mean ``M_alpha^{(s,t)}(u, v)`` of two positive values."""
    alpha = as_alpha(alpha)
    if u <= 0 or v <= 0:
        raise ValueError("alpha_mean needs positive values")
    if s < 0 or t < 0 or abs(s + t - 1.0) > WEIGHT_TOL:
        raise ValueError("weights must be nonnegative and sum to 1")
    if alpha == INF:
        return max(u, v)
    if alpha == 0.0:
        return u**s * v**t
    return (s * u**alpha + t * v**alpha) ** (1.0 / alpha)


SERIES_CUT = 1e-6


def phi(alpha, s):
    """Map base values to function values (vectorized); ``psi = inf`` gives 0."""
    s = np.asarray(s, dtype=float)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        if alpha == INF:
            out = np.where(np.isfinite(s), 1.0, 0.0)
        elif alpha == 0.0:
            out = np.exp(-s)
        else:
            # log1p keeps small alpha accurate: (1 - a s)^(1/a) -> exp(-s)
            base = -alpha * s
            out = np.where(base > -1.0, np.exp(np.log1p(np.maximum(base, -1.0)) / alpha), 0.0)
            # series where alpha * s is tiny; the quotient loses bits for subnormal products
            small = np.abs(base) < SERIES_CUT
            out = np.where(small, np.exp(-s * (1.0 - base * (0.5 - base / 3.0))), out)
            out = np.where(np.isinf(s), 0.0, out)
    return out if out.ndim else float(out)


def phi_inv(alpha, y):
    """Base value of a function value: ``(1 - y**alpha)/alpha`` or ``-log y``."""
    y = np.asarray(y, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        if alpha == INF:
            out = np.where(y > 0.0, 0.0, INF)
        elif alpha == 0.0:
            out = np.where(y > 0.0, -np.log(np.where(y > 0.0, y, 1.0)), INF)
        else:
            logy = np.log(np.where(y > 0.0, y, 1.0))
            u = alpha * logy
            val = np.where(np.abs(u) < SERIES_CUT, -logy * (1.0 + u * (0.5 + u / 6.0)), -np.expm1(u) / alpha)
            out = np.where(y > 0.0, val, 1.0 / alpha if alpha > 0 else INF)
    return out if out.ndim else float(out)


def _as_points(x, dim):
    x = np.asarray(x, dtype=float)
    return x.reshape(-1, dim)


# --------------------------------------------------------------------------
# base functions


class BaseFunction:
    """Convex, lsc, coercive base function psi on R^n (n = 1 or 2)."""

    kind = None
    dim = None
    is_indicator = False

    def __call__(self, x):
        raise NotImplementedError

    def min_value(self):
        raise NotImplementedError

    def argmin(self):
        raise NotImplementedError

    def sublevel(self, s):
        """Exact descriptor of ``{psi <= s}``."""
        raise NotImplementedError

    def sublevel_volume(self, s):
        return self.sublevel(s).volume()

    def chord(self, h, u, s):
        """Interval ``{tau : psi(h + tau u) <= s}`` for each base point; ``s`` per point."""
        raise NotImplementedError

    def domain(self):
        """Descriptor of dom(psi), or None for the whole space."""
        return None

    def params(self):
        raise NotImplementedError

    def to_json(self):
        return {"kind": self.kind, "dim": self.dim, "params": self.params()}


def _matrix(Q, dim):
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    if Q.shape == (1, 1) and dim == 2:
        Q = Q[0, 0] * np.eye(2)
    if Q.shape != (dim, dim):
        raise CatalogError(f"matrix has shape {Q.shape}, expected {(dim, dim)}")
    if not np.allclose(Q, Q.T):
        raise CatalogError("matrix must be symmetric")
    if np.min(np.linalg.eigvalsh(Q)) <= 0.0:
        raise CatalogError("matrix must be positive definite")
    return Q


class Quadratic(BaseFunction):
    """``psi(x) = (x - c)^T Q (x - c)``."""

    kind = "quadratic"

    def __init__(self, Q, center=None):
        if center is None:
            center = np.zeros(np.atleast_2d(Q).shape[0])
        self.center = np.asarray(center, dtype=float).reshape(-1)
        self.dim = self.center.size
        self.Q = _matrix(Q, self.dim)
        self.det = float(np.linalg.det(self.Q))

    def __call__(self, x):
        d = _as_points(x, self.dim) - self.center
        return np.einsum("ij,jk,ik->i", d, self.Q, d)

    def min_value(self):
        return 0.0

    def argmin(self):
        return self.center.copy()

    def sublevel(self, s):
        if s < 0:
            return EmptySet(self.dim)
        if self.dim == 1:
            r = math.sqrt(s / self.Q[0, 0])
            return Interval(self.center[0] - r, self.center[0] + r)
        return Ellipse(self.Q, self.center, s)

    def sublevel_volume(self, s):
        s = np.asarray(s, dtype=float)
        out = ball_volume(self.dim) * np.maximum(s, 0.0) ** (self.dim / 2.0) / math.sqrt(self.det)
        return out if out.ndim else float(out)

    def chord(self, h, u, s):
        d = _as_points(h, self.dim) - self.center
        u = np.asarray(u, dtype=float).reshape(-1)
        a = u @ self.Q @ u
        b = d @ self.Q @ u
        c = np.einsum("ij,jk,ik->i", d, self.Q, d) - np.asarray(s, dtype=float)
        disc = b * b - a * c
        root = np.sqrt(np.maximum(disc, 0.0))
        lo = np.where(disc >= 0.0, (-b - root) / a, np.inf)
        hi = np.where(disc >= 0.0, (-b + root) / a, -np.inf)
        return lo, hi

    def params(self):
        return {"Q": self.Q.tolist(), "center": self.center.tolist()}


class Cone(BaseFunction):
    """Polyhedral gauge ``psi(x) = max_j <a_j, x - c>`` on the cone ``{<d_k, x - c> <= 0}``.

    In 1D, ``slopes=(right, left)`` is shorthand for normals ``[[right], [-left]]``.
    """

    kind = "cone"

    def __init__(self, normals=None, apex=None, domain=None, slopes=None):
        if slopes is not None:
            right, left = slopes
            normals = [[float(right)], [-float(left)]]
        if normals is None:
            raise CatalogError("cone needs normals or slopes")
        self.normals = np.atleast_2d(np.asarray(normals, dtype=float))
        self.dim = self.normals.shape[1]
        self.apex = np.zeros(self.dim) if apex is None else np.asarray(apex, dtype=float).reshape(-1)
        if domain is None or len(domain) == 0:
            self.walls = np.zeros((0, self.dim))
        else:
            self.walls = np.atleast_2d(np.asarray(domain, dtype=float))
        unit = self._unit_sublevel()
        if unit is None:
            raise CatalogError("cone base is not coercive (unbounded sublevel sets)")
        self._unit = unit
        self.unit_volume = unit.volume()
        if self.unit_volume <= 0.0:
            raise CatalogError("cone base has a degenerate domain")

    def _constraints(self):
        A = np.vstack([self.normals, self.walls])
        return A

    def _unit_sublevel(self):
        A = self._constraints()
        b = np.concatenate([np.ones(len(self.normals)), np.zeros(len(self.walls))])
        if self.dim == 1:
            lo, hi = line_halfspace_interval(np.zeros((1, 1)), np.ones(1), A, b)
            if not (np.isfinite(lo[0]) and np.isfinite(hi[0])):
                return None
            if self(np.array([[lo[0]]]) + self.apex)[0] < -1e-12 or self(np.array([[hi[0]]]) + self.apex)[0] < -1e-12:
                return None
            return Interval(lo[0], hi[0])
        verts, bounded = halfspace_polygon(A, b)
        if not bounded or len(verts) < 3:
            return None
        vals = np.max(verts @ self.normals.T, axis=1)
        if np.min(vals) < -1e-12:
            return None
        return Polygon(verts[convex_hull_2d(verts)])

    def __call__(self, x):
        d = _as_points(x, self.dim) - self.apex
        val = np.max(d @ self.normals.T, axis=1)
        if len(self.walls):
            scale = 1.0 + np.max(np.abs(d), axis=1)
            outside = np.any(d @ self.walls.T > 1e-12 * scale[:, None], axis=1)
            val = np.where(outside, INF, val)
        return val

    def min_value(self):
        return 0.0

    def argmin(self):
        return self.apex.copy()

    def sublevel(self, s):
        if s < 0:
            return EmptySet(self.dim)
        if self.dim == 1:
            return Interval(self.apex[0] + s * self._unit.lo, self.apex[0] + s * self._unit.hi)
        return Polygon(self.apex + s * self._unit.vertices)

    def sublevel_volume(self, s):
        s = np.asarray(s, dtype=float)
        out = self.unit_volume * np.maximum(s, 0.0) ** self.dim
        return out if out.ndim else float(out)

    def chord(self, h, u, s):
        h = _as_points(h, self.dim) - self.apex
        s = np.asarray(s, dtype=float).reshape(-1)
        A = self._constraints()
        b = np.concatenate(
            [np.repeat(s[:, None], len(self.normals), axis=1), np.zeros((len(s), len(self.walls)))], axis=1
        )
        return line_halfspace_interval(h, np.asarray(u, float).reshape(-1), A, b)

    def domain(self):
        if len(self.walls) == 0:
            return None
        return self.walls

    def params(self):
        out = {"normals": self.normals.tolist(), "apex": self.apex.tolist()}
        if len(self.walls):
            out["domain"] = self.walls.tolist()
        return out


class IndicatorOfPolytope(BaseFunction):
    """Convex indicator: 0 on ``conv(vertices)``, +inf outside."""

    kind = "indicator_polytope"
    is_indicator = True

    def __init__(self, vertices):
        v = np.asarray(vertices, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        self.dim = v.shape[1]
        if self.dim == 1:
            self.body = Interval(v.min(), v.max())
        else:
            hull = convex_hull_2d(v)
            if len(hull) < 3:
                raise CatalogError("polytope is not full-dimensional")
            self.body = Polygon(v[hull])
        if self.body.volume() <= 0.0:
            raise CatalogError("polytope is not full-dimensional")

    @property
    def vertices(self):
        if self.dim == 1:
            return np.array([[self.body.lo], [self.body.hi]])
        return self.body.vertices

    def __call__(self, x):
        return np.where(self.body.contains(_as_points(x, self.dim)), 0.0, INF)

    def min_value(self):
        return 0.0

    def argmin(self):
        return self.vertices.mean(axis=0)

    def sublevel(self, s):
        return self.body if s >= 0 else EmptySet(self.dim)

    def sublevel_volume(self, s):
        s = np.asarray(s, dtype=float)
        out = np.where(s >= 0, self.body.volume(), 0.0)
        return out if out.ndim else float(out)

    def chord(self, h, u, s):
        lo, hi = self.body.chord(_as_points(h, self.dim), np.asarray(u, float).reshape(-1))
        s = np.asarray(s, dtype=float).reshape(-1)
        return np.where(s >= 0, lo, np.inf), np.where(s >= 0, hi, -np.inf)

    def domain(self):
        return self.body

    def params(self):
        return {"vertices": self.vertices.tolist()}


class IndicatorOfEllipsoid(BaseFunction):
    """Convex indicator of ``{(x - c)^T Q (x - c) <= 1}``."""

    kind = "indicator_ellipsoid"
    is_indicator = True

    def __init__(self, Q, center=None):
        if center is None:
            center = np.zeros(np.atleast_2d(Q).shape[0])
        self.center = np.asarray(center, dtype=float).reshape(-1)
        self.dim = self.center.size
        self.Q = _matrix(Q, self.dim)
        if self.dim == 1:
            r = 1.0 / math.sqrt(self.Q[0, 0])
            self.body = Interval(self.center[0] - r, self.center[0] + r)
        else:
            self.body = Ellipse(self.Q, self.center, 1.0)

    def __call__(self, x):
        return np.where(self.body.contains(_as_points(x, self.dim)), 0.0, INF)

    def min_value(self):
        return 0.0

    def argmin(self):
        return self.center.copy()

    def sublevel(self, s):
        return self.body if s >= 0 else EmptySet(self.dim)

    def sublevel_volume(self, s):
        s = np.asarray(s, dtype=float)
        out = np.where(s >= 0, self.body.volume(), 0.0)
        return out if out.ndim else float(out)

    def chord(self, h, u, s):
        lo, hi = self.body.chord(_as_points(h, self.dim), np.asarray(u, float).reshape(-1))
        s = np.asarray(s, dtype=float).reshape(-1)
        return np.where(s >= 0, lo, np.inf), np.where(s >= 0, hi, -np.inf)

    def domain(self):
        return self.body

    def params(self):
        return {"Q": self.Q.tolist(), "center": self.center.tolist()}


class PiecewiseAffine(BaseFunction):
    """Base given by an inner linearization (convex, piecewise affine, finite domain)."""

    kind = "piecewise_affine"

    def __init__(self, linearization):
        self.lin = linearization
        self.dim = linearization.dim
        if linearization.degenerate:
            raise CatalogError("piecewise-affine base needs a full-dimensional domain")
        A, b = linearization.domain_halfspaces()
        self._dom_A, self._dom_b = A, b
        # p = max of its facet maps on the domain
        self._maps_a = np.array([f.gradient for f in linearization.facets])
        self._maps_b = np.array([f.offset for f in linearization.facets])

    def __call__(self, x):
        return self.lin.evaluate(_as_points(x, self.dim))

    def min_value(self):
        return float(np.min(self.lin.heights))

    def argmin(self):
        return self.lin.points[int(np.argmin(self.lin.heights))].copy()

    def _constraints(self, s):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        A = np.vstack([self._dom_A, self._maps_a])
        b = np.concatenate(
            [np.broadcast_to(self._dom_b, (len(s), len(self._dom_b))), s[:, None] - self._maps_b[None, :]], axis=1
        )
        return A, b

    def sublevel(self, s):
        if s < self.min_value():
            return EmptySet(self.dim)
        A, b = self._constraints(s)
        if self.dim == 1:
            lo, hi = line_halfspace_interval(np.zeros((1, 1)), np.ones(1), A, b)
            return Interval(lo[0], hi[0])
        verts, _ = halfspace_polygon(A, b[0])
        if len(verts) < 3:
            return Polygon(verts)
        return Polygon(verts[convex_hull_2d(verts)])

    def chord(self, h, u, s):
        A, b = self._constraints(s)
        return line_halfspace_interval(_as_points(h, self.dim), np.asarray(u, float).reshape(-1), A, b)

    def domain(self):
        if self.dim == 1:
            return Interval(self.lin.points[:, 0].min(), self.lin.points[:, 0].max())
        return Polygon(self.lin.domain_vertices())

    def params(self):
        return {"points": np.column_stack([self.lin.points, self.lin.heights]).tolist()}


class GridBacked(BaseFunction):
    """Base of a sampled function; level queries are answered on function values."""

    kind = "grid"
    f_valued = True

    def __init__(self, grid, alpha):
        self.grid = grid
        self.alpha = alpha
        self.dim = grid.dim

    def __call__(self, x):
        return phi_inv(self.alpha, self.grid(_as_points(x, self.dim)))

    def values(self, x):
        return self.grid(_as_points(x, self.dim))

    def min_value(self):
        return phi_inv(self.alpha, self.grid.max_value())

    def argmin(self):
        return self.grid.argmax()

    def superlevel(self, t):
        return GridMask(self.grid, self.grid.values >= t)

    def superlevel_volume(self, t):
        return self.superlevel(t).volume()

    def superlevel_chord(self, h, u, t, bracket=1e-10):
        """Chord ``{tau : f(h + tau u) >= t}`` by sampling then bisection."""
        h = _as_points(h, self.dim)
        u = np.asarray(u, dtype=float).reshape(-1)
        t = np.broadcast_to(np.asarray(t, dtype=float), (len(h),))
        corners = np.array(np.meshgrid(*[[self.grid.lo[k], self.grid.hi[k]] for k in range(self.dim)])).reshape(
            self.dim, -1
        ).T @ self.grid.frame.T
        reach = float(np.max(np.linalg.norm(corners[:, None, :] - h[None, :, :], axis=2)))
        k = 4 * max(self.grid.values.shape) + 1
        taus = np.linspace(-reach, reach, k)
        pts = h[:, None, :] + taus[None, :, None] * u[None, None, :]
        vals = self.grid(pts.reshape(-1, self.dim)).reshape(len(h), k)
        inside = vals >= t[:, None]
        has = inside.any(axis=1)
        first = np.argmax(inside, axis=1)
        last = k - 1 - np.argmax(inside[:, ::-1], axis=1)
        lo = np.full(len(h), np.inf)
        hi = np.full(len(h), -np.inf)
        rows = np.nonzero(has)[0]
        if len(rows) == 0:
            return lo, hi

        def refine(inner, outer):
            a, b = inner.copy(), outer.copy()
            while np.max(np.abs(a - b)) > bracket * max(reach, 1.0):
                mid = 0.5 * (a + b)
                v = self.grid(h[rows] + mid[:, None] * u)
                ok = v >= t[rows]
                a = np.where(ok, mid, a)
                b = np.where(ok, b, mid)
            return a

        f_idx, l_idx = first[rows], last[rows]
        lo[rows] = refine(taus[f_idx], taus[np.maximum(f_idx - 1, 0)])
        hi[rows] = refine(taus[l_idx], taus[np.minimum(l_idx + 1, k - 1)])
        return lo, hi

    def params(self):
        return self.grid.to_json()


class RadialBase(BaseFunction):
    """Radial base ``psi(x) = value(|x|)`` with sublevel balls of radius ``radius(s)``.

    ``radius`` and ``value`` are vectorized callables, inverse to each other
    on the range of psi.
    """

    kind = "radial"

    def __init__(self, dim, radius, value, min_value=0.0, indicator=False, label=None):
        self.dim = dim
        self._radius = radius
        self._value = value
        self._min = float(min_value)
        self.is_indicator = indicator
        self.label = label

    def __call__(self, x):
        r = np.linalg.norm(_as_points(x, self.dim), axis=1)
        return self._value(r)

    def radius(self, s):
        s = np.asarray(s, dtype=float)
        out = np.where(s >= self._min, self._radius(np.maximum(s, self._min)), 0.0)
        out = np.where(s < self._min, -1.0, out)
        return out

    def min_value(self):
        return self._min

    def argmin(self):
        return np.zeros(self.dim)

    def sublevel(self, s):
        r = float(self.radius(s))
        if r < 0:
            return EmptySet(self.dim)
        return Ball(np.zeros(self.dim), r)

    def sublevel_volume(self, s):
        r = np.asarray(self.radius(s))
        out = np.where(r >= 0, ball_volume(self.dim) * np.maximum(r, 0.0) ** self.dim, 0.0)
        return out if out.ndim else float(out)

    def chord(self, h, u, s):
        h = _as_points(h, self.dim)
        u = np.asarray(u, dtype=float).reshape(-1)
        r = np.asarray(self.radius(s), dtype=float).reshape(-1)
        b = h @ u
        c = np.sum(h * h, axis=1) - r * r
        disc = b * b - c
        ok = (disc >= 0) & (r >= 0)
        root = np.sqrt(np.maximum(disc, 0.0))
        return np.where(ok, -b - root, np.inf), np.where(ok, -b + root, -np.inf)

    def domain(self):
        if self.is_indicator:
            return Ball(np.zeros(self.dim), float(self.radius(self._min)))
        return None

    def params(self):
        return {"label": self.label}


class TabulatedRadial(BaseFunction):
    """Discrete symmetric decreasing rearrangement of grid samples.

    ``sorted_values`` are the samples in decreasing order, each owning
    ``cell_volume``; the function at radius r is the largest value whose
    superlevel volume reaches the ball volume at r.
    """

    kind = "radial_table"
    f_valued = True

    def __init__(self, dim, sorted_values, cell_volume, alpha):
        self.dim = dim
        self.sorted_values = np.asarray(sorted_values, dtype=float)
        self.cell_volume = float(cell_volume)
        self.alpha = alpha
        self.kappa = ball_volume(dim)

    def values_at_radius(self, r):
        r = np.asarray(r, dtype=float)
        target = self.kappa * r**self.dim / self.cell_volume
        k = np.maximum(np.ceil(target - 1e-12) - 1, 0).astype(np.int64)
        out = np.where(k < len(self.sorted_values), self.sorted_values[np.minimum(k, len(self.sorted_values) - 1)], 0.0)
        return out

    def values(self, x):
        return self.values_at_radius(np.linalg.norm(_as_points(x, self.dim), axis=1))

    def __call__(self, x):
        return phi_inv(self.alpha, self.values(x))

    def min_value(self):
        return phi_inv(self.alpha, self.sorted_values[0])

    def argmin(self):
        return np.zeros(self.dim)

    def superlevel_radius(self, t):
        t = np.asarray(t, dtype=float)
        # number of samples >= t in a decreasing array
        count = len(self.sorted_values) - np.searchsorted(self.sorted_values[::-1], t, side="left")
        return np.where(count > 0, (count * self.cell_volume / self.kappa) ** (1.0 / self.dim), -1.0)

    def superlevel(self, t):
        r = float(self.superlevel_radius(t))
        if r < 0:
            return EmptySet(self.dim)
        return Ball(np.zeros(self.dim), r)

    def superlevel_volume(self, t):
        return self.superlevel(t).volume()

    def superlevel_chord(self, h, u, t):
        h = _as_points(h, self.dim)
        u = np.asarray(u, dtype=float).reshape(-1)
        r = np.asarray(self.superlevel_radius(t), dtype=float).reshape(-1)
        r = np.broadcast_to(r, (len(h),))
        b = h @ u
        c = np.sum(h * h, axis=1) - r * r
        disc = b * b - c
        ok = (disc >= 0) & (r >= 0)
        root = np.sqrt(np.maximum(disc, 0.0))
        return np.where(ok, -b - root, np.inf), np.where(ok, -b + root, -np.inf)

    def params(self):
        return {"cell_volume": self.cell_volume, "sorted_values": self.sorted_values.tolist()}


# --------------------------------------------------------------------------
# the function class


class AlphaConcaveFunction:
    """``f = phi_alpha(psi)`` for a base function psi; ``height * 1_K`` when alpha is +inf.

    Instances are immutable; all queries are pure.
    """

    def __init__(self, alpha, base, height=1.0, name=None, exact_mass=None):
        self.alpha = as_alpha(alpha)
        self.base = base
        self.dim = base.dim
        self.height = float(height)
        self.name = name
        self._exact_mass = exact_mass
        if self.height <= 0:
            raise CatalogError("height must be positive")
        if self.alpha != INF and self.height != 1.0:
            raise CatalogError("a height factor is only meaningful for alpha = +inf")
        if self.alpha == INF and not base.is_indicator and not getattr(base, "f_valued", False):
            raise CatalogError("alpha = +inf requires an indicator base")

    def __repr__(self):
        label = self.name or self.base.kind
        return f"AlphaConcaveFunction({label!r}, alpha={self.alpha!r}, dim={self.dim})"

    @property
    def f_valued(self):
        return getattr(self.base, "f_valued", False)

    # -- evaluation -----------------------------------------------------

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        single = x.ndim <= 1 and x.size == self.dim
        pts = x.reshape(-1, self.dim)
        if self.f_valued:
            out = self.base.values(pts)
        else:
            out = self.height * phi(self.alpha, self.base(pts))
        out = np.asarray(out, dtype=float)
        return float(out[0]) if single else out

    def max_value(self):
        if self.f_valued:
            return float(np.max(self.base.values(self.base.argmin()[None, :])))
        return self.height * phi(self.alpha, self.base.min_value())

    def peak(self):
        return self.base.argmin()

    def level_to_base(self, t):
        """Base level s with ``{f >= t} = {psi <= s}``, or None when empty."""
        if t <= 0:
            raise ValueError("levels must be positive")
        if self.alpha == INF:
            return 0.0 if t <= self.height * (1 + 1e-15) else None
        if self.alpha > 0 and t > 1.0:
            return None
        return float(phi_inv(self.alpha, t))

    # -- level sets and chords ------------------------------------------

    def superlevel_set(self, t):
        if self.f_valued:
            return self.base.superlevel(t)
        s = self.level_to_base(t)
        return EmptySet(self.dim) if s is None else self.base.sublevel(s)

    def levelset_volume(self, t):
        if t > self.max_value() * (1 + 1e-15):
            return 0.0
        return self.superlevel_set(t).volume()

    def chord(self, h, u, t):
        """Chord ``{tau : f(h + tau u) >= t}`` for each base point ``h`` and level ``t``."""
        h = _as_points(h, self.dim)
        t = np.broadcast_to(np.asarray(t, dtype=float), (len(h),))
        if self.f_valued:
            return self.base.superlevel_chord(h, u, t)
        if self.alpha == INF:
            s = np.where(t <= self.height * (1 + 1e-15), 0.0, -1.0)
        else:
            s = np.asarray(phi_inv(self.alpha, t), dtype=float)
            if self.alpha > 0:
                s = np.where(t > 1.0, -INF, s)
        lo, hi = self.base.chord(h, u, s)
        empty = (s < self.base.min_value() - 1e-15) | (lo > hi)
        return np.where(empty, np.inf, lo), np.where(empty, -np.inf, hi)

    # -- support --------------------------------------------------------

    def support_set(self):
        """Closed support as a descriptor, or None when it is the whole space."""
        if self.f_valued:
            return None
        if self.alpha > 0 and self.alpha != INF:
            return self.base.sublevel(1.0 / self.alpha)
        dom = self.base.domain()
        if dom is None:
            return None
        if isinstance(dom, np.ndarray):
            # cone walls through the apex: clip to a large box around the tail region
            s = self.tail_base_level()
            return self.base.sublevel(s)
        return dom

    def tail_base_level(self, rel=1e-16):
        """Base level beyond which f is below ``rel * max f``."""
        fmax = self.max_value()
        if self.alpha == INF:
            return 0.0
        return float(phi_inv(self.alpha, rel * fmax)) if self.alpha <= 0 else 1.0 / self.alpha

    def bounding_box(self, rel=1e-16):
        """Box containing ``{f >= rel * max f}``."""
        if self.f_valued:
            grid = getattr(self.base, "grid", None)
            if grid is not None:
                return grid.world_bbox(threshold=rel * self.max_value())
            r = float(self.base.superlevel_radius(rel * self.max_value()))
            return -np.full(self.dim, r), np.full(self.dim, r)
        if self.alpha == INF or self.base.is_indicator:
            return self.base.sublevel(0.0).bbox()
        return self.base.sublevel(self.tail_base_level(rel)).bbox()

    def contains_origin(self):
        if self.f_valued:
            return self(np.zeros(self.dim)) > 0
        psi0 = float(self.base(np.zeros((1, self.dim)))[0])
        if self.alpha > 0 and self.alpha != INF:
            return psi0 <= 1.0 / self.alpha * (1 + 1e-12)
        return math.isfinite(psi0)

    # -- mass -----------------------------------------------------------

    def exact_mass(self):
        """Closed-form total mass, or None when the kind has none."""
        if self._exact_mass is not None:
            return self._exact_mass
        b, a, n = self.base, self.alpha, self.dim
        if b.is_indicator and not isinstance(b, RadialBase):
            return self.height * b.sublevel(0.0).volume() if a == INF else b.sublevel(0.0).volume()
        if isinstance(b, Quadratic):
            return ball_volume(n) * n / 2.0 * _radial_moment(a, n / 2.0) / math.sqrt(b.det)
        if isinstance(b, Cone):
            return b.unit_volume * n * _radial_moment(a, float(n))
        if isinstance(b, PiecewiseAffine):
            from .measure import linearization_mass

            return linearization_mass(a, b.lin)
        return None


def _radial_moment(alpha, p):
    """``int_0^inf phi_alpha(s) s^(p-1) ds``."""
    if alpha == 0.0:
        return math.gamma(p)
    if alpha > 0:
        return alpha ** (-p) * special.beta(p, 1.0 / alpha + 1.0)
    beta = -alpha
    if 1.0 / beta <= p:
        return INF
    return beta ** (-p) * special.beta(p, 1.0 / beta - p)


# --------------------------------------------------------------------------
# operations


def base_of_function(f):
    """The base function psi of f (``I_K`` for indicators, for every alpha)."""
    return f.base


def function_of_base(alpha, psi, height=1.0, name=None):
    """Build ``f = phi_alpha(psi)`` after checking the class requirements."""
    alpha = as_alpha(alpha)
    if alpha < 0:
        if not isinstance(psi, Quadratic):
            raise CatalogError("alpha < 0 is only supported for quadratic bases")
        if alpha <= -2.0 / psi.dim:
            raise CatalogError(f"alpha = {alpha} gives a non-integrable function in dimension {psi.dim}")
    if alpha == INF and not psi.is_indicator:
        raise CatalogError("alpha = +inf requires an indicator base")
    f = AlphaConcaveFunction(alpha, psi, height=height if alpha == INF else 1.0, name=name)
    if not f.contains_origin():
        raise CatalogError("the origin must lie in the support")
    return f


def evaluate(f, x):
    return f(x)


def superlevel_set_descriptor(f, t):
    if t <= 0:
        raise ValueError("level must be positive")
    return f.superlevel_set(t)


def is_alpha_concave_on(f, alpha, x, y, lam, slack=1e-10):
    """Check the alpha-mean inequality on triples; returns the minimum relative slack."""
    fx, fy = f(x), f(y)
    z = lam[:, None] * x + (1 - lam[:, None]) * y
    fz = f(z)
    ok = (fx > 0) & (fy > 0)
    worst = INF
    for a, b, c, l in zip(fx[ok], fy[ok], fz[ok], lam[ok]):
        m = alpha_mean(alpha, l, 1 - l, a, b)
        worst = min(worst, (c - m) / max(m, 1e-300))
    return worst
