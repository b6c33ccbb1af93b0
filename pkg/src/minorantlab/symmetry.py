"""Steiner symmetrization and symmetric decreasing rearrangement.

For a hyperplane ``H = u^perp`` every chord of the hypograph of f in direction
u is slid along u until it is centred on ``H x R``.  Equivalently each line
``x' + s u`` carries the one-dimensional symmetric decreasing rearrangement
of ``s -> f(x' + s u)``.

Symmetrals are returned as grid-backed functions in the frame ``(v, u)``
(``v`` spans H in the plane).  For catalog inputs the node values are exact:
the value at ``x' + s u`` is the largest level whose chord at ``x'`` has
half-length at least ``|s|``, found by bisection on base levels.  Sampled
inputs are resampled on the new frame and sorted column by column.
"""

import math

import numpy as np

from .functional import (
    INF,
    AlphaConcaveFunction,
    Cone,
    GridBacked,
    IndicatorOfEllipsoid,
    Quadratic,
    RadialBase,
    TabulatedRadial,
    phi,
)
from .grid import GridFunction
from .measure import support_level, total_mass
from .sets import ball_volume

RESOLUTION = 513
PAD = 0.10
BISECTION_STEPS = 64
GRID_TAIL_REL = 1e-10
INTERP_ORDER = 3


class EmptyChord(ValueError):
    """The line through the query point misses the hypograph."""


class Hyperplane:
    """``H = u^perp`` through the origin, stored by its unit normal."""

    def __init__(self, normal):
        u = np.atleast_1d(np.asarray(normal, dtype=float))
        norm = float(np.linalg.norm(u))
        if norm == 0.0 or not np.isfinite(norm):
            raise ValueError("normal must be a nonzero finite vector")
        if abs(norm - 1.0) > 1e-12:
            u = u / norm
        self.normal = u
        self.dim = u.size
        if self.dim not in (1, 2):
            raise ValueError("only dimensions 1 and 2 are supported")

    def __repr__(self):
        return f"Hyperplane(normal={self.normal.tolist()!r})"

    @property
    def tangent(self):
        """Unit vector spanning H (n = 2); None in dimension 1."""
        if self.dim == 1:
            return None
        u = self.normal
        return np.array([-u[1], u[0]])

    def frame(self):
        """Orthonormal matrix with columns ``(v, u)``, or ``[[u]]`` in 1D."""
        if self.dim == 1:
            return self.normal.reshape(1, 1)
        return np.column_stack([self.tangent, self.normal])

    def split(self, x):
        """Decompose points as ``x = h + s u`` with ``h`` in H."""
        x = np.asarray(x, dtype=float).reshape(-1, self.dim)
        s = x @ self.normal
        return x - s[:, None] * self.normal, s

    def same_as(self, other, tol=1e-12):
        return self.dim == other.dim and abs(abs(float(self.normal @ other.normal)) - 1.0) <= tol

    def to_json(self):
        return {"normal": self.normal.tolist()}


class ChordBounds:
    __slots__ = ("lower", "upper")

    def __init__(self, lower, upper):
        self.lower = float(lower)
        self.upper = float(upper)

    @property
    def mid(self):
        return 0.5 * (self.upper + self.lower)

    @property
    def half_length(self):
        return 0.5 * (self.upper - self.lower)

    def __iter__(self):
        return iter((self.lower, self.upper))

    def __repr__(self):
        return f"ChordBounds(lower={self.lower!r}, upper={self.upper!r})"


def chord_arrays(f, H, x, y):
    """Vectorized chord endpoints of ``hyp(f)`` through ``(x_i, y_i)`` along u.

    ``x`` is projected onto H first.  Empty chords give ``lo > hi``.
    """
    h, _ = H.split(x)
    y = np.broadcast_to(np.asarray(y, dtype=float), (len(h),))
    return f.chord(h, H.normal, y)


def chord_bounds(f, H, h):
    """Chord ``[f^-(h), f^+(h)]`` of the hypograph through ``h = (x', t)``.

    ``x'`` is a point of H (the component along u is discarded) and ``t`` a
    positive height.
    """
    xprime, t = h
    if t <= 0:
        raise EmptyChord("chords at nonpositive heights are unbounded")
    lo, hi = chord_arrays(f, H, np.atleast_1d(np.asarray(xprime, dtype=float)), t)
    if not lo[0] <= hi[0]:
        raise EmptyChord(f"no chord through {np.asarray(xprime).tolist()} at height {t!r}")
    return ChordBounds(lo[0], hi[0])


# --------------------------------------------------------------------------
# exact symmetral (pointwise)


class ExactSymmetral:
    """Pointwise evaluator of ``S_H f`` built from exact chord queries.

    Used where grid values are not precise enough, for instance to clamp
    points into the symmetral's hypograph.
    """

    def __init__(self, f, H):
        self.f = f
        self.H = H
        self.alpha = f.alpha
        self.dim = f.dim
        self._fmax = f.max_value()
        if not f.f_valued:
            self._smax = support_level(f)[0] if f.alpha <= 0 else (0.0 if f.alpha == INF else 1.0 / f.alpha)

    def _half(self, h, level, base=True):
        if base:
            lo, hi = self.f.base.chord(h, self.H.normal, level)
        else:
            lo, hi = self.f.chord(h, self.H.normal, level)
        return np.where(lo <= hi, 0.5 * (hi - lo), -1.0)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        single = x.ndim <= 1 and x.size == self.dim
        h, s = self.H.split(x.reshape(-1, self.dim))
        out = _symmetral_values(self, h, np.abs(s))
        return float(out[0]) if single else out

    def max_value(self):
        return self._fmax

    def chord(self, h, u, t):
        if not np.allclose(np.abs(np.asarray(u, float) @ self.H.normal), 1.0):
            raise ValueError("the exact symmetral only answers chords along its normal")
        h, _ = self.H.split(h)
        t = np.broadcast_to(np.asarray(t, dtype=float), (len(h),))
        w = self._half(h, t, base=False)
        return np.where(w >= 0, -w, np.inf), np.where(w >= 0, w, -np.inf)


def _symmetral_values(sym, h, s_abs):
    """``sup{y : half-chord(h, y) >= s}`` for each base point and offset."""
    f = sym.f
    m = len(h)
    if f.alpha == INF or f.base.is_indicator:
        lo, hi = f.base.chord(h, sym.H.normal, np.zeros(m))
        ok = (lo <= hi) & (0.5 * (hi - lo) >= s_abs)
        return np.where(ok, f.max_value(), 0.0)
    if f.f_valued:
        # bisection on function levels
        lo_t = np.zeros(m)
        hi_t = np.full(m, sym._fmax)
        top = sym._half(h, hi_t, base=False) >= s_abs
        for _ in range(BISECTION_STEPS):
            mid = 0.5 * (lo_t + hi_t)
            ok = sym._half(h, np.maximum(mid, 1e-300), base=False) >= s_abs
            lo_t = np.where(ok, mid, lo_t)
            hi_t = np.where(ok, hi_t, mid)
        return np.where(top, sym._fmax, lo_t)
    if isinstance(f.base, Quadratic):
        # psi along the line is  min_line + (u^T Q u) s^2  around its minimizer
        Q, u = f.base.Q, sym.H.normal
        d = h - f.base.center
        a = float(u @ Q @ u)
        b = d @ Q @ u
        low = np.einsum("ij,jk,ik->i", d, Q, d) - b * b / a
        return np.asarray(phi(f.alpha, np.maximum(low, 0.0) + a * s_abs**2), dtype=float)
    # bisection on base levels: the smallest sigma whose chord is long enough
    smin = f.base.min_value()
    smax = sym._smax
    reach = sym._half(h, np.full(m, smax)) >= s_abs
    a = np.full(m, smin)
    b = np.full(m, smax)
    for _ in range(BISECTION_STEPS):
        mid = 0.5 * (a + b)
        ok = sym._half(h, mid) >= s_abs
        b = np.where(ok, mid, b)
        a = np.where(ok, a, mid)
    at_min = sym._half(h, np.full(m, smin)) >= s_abs
    sigma = np.where(at_min, smin, b)
    return np.where(reach, phi(f.alpha, sigma), 0.0)


# --------------------------------------------------------------------------
# grids


def _grid_support(grid, tail_rel=GRID_TAIL_REL):
    """Node mask carrying all but ``tail_rel`` of the grid mass, and the dropped mass."""
    vals = grid.values.reshape(-1)
    total = float(vals.sum())
    if total <= 0.0:
        return np.zeros(vals.shape, dtype=bool), 0.0
    order = np.argsort(vals, kind="stable")
    csum = np.cumsum(vals[order])
    cut = int(np.searchsorted(csum, tail_rel * total, side="right"))
    mask = np.ones(vals.shape, dtype=bool)
    mask[order[:cut]] = False
    dropped = float(csum[cut - 1]) * grid.cell_volume if cut > 0 else 0.0
    return mask, dropped


def support_extents(f, directions):
    """``(min, max)`` of ``<x, d>`` over the essential support, plus its tail mass."""
    if f.f_valued:
        grid = getattr(f.base, "grid", None)
        if grid is not None:
            mask, dropped = _grid_support(grid)
            pts = grid.node_coordinates()[mask]
            if len(pts) == 0:
                return [(-1.0, 1.0) for _ in directions], grid.tail_mass
            slack = float(np.linalg.norm(grid.spacing))
            out = []
            for d in directions:
                proj = pts @ d
                out.append((float(proj.min()) - slack, float(proj.max()) + slack))
            return out, grid.tail_mass + dropped
        r = float(f.base.superlevel_radius(f.base.sorted_values[f.base.sorted_values > 0][-1]))
        return [(-r, r) for _ in directions], 0.0
    s, tail = support_level(f)
    body = f.base.sublevel(s)
    return [body.extent(d) for d in directions], tail


def _symmetral_box(f, H, resolution):
    frame = H.frame()
    dirs = [frame[:, k] for k in range(f.dim)]
    ext, tail = support_extents(f, dirs)
    lo, hi = np.zeros(f.dim), np.zeros(f.dim)
    for k in range(f.dim - 1):
        a, b = ext[k]
        pad = PAD * max(b - a, 1e-12)
        lo[k], hi[k] = a - pad, b + pad
    a, b = ext[-1]
    half = (1.0 + PAD) * 0.5 * max(b - a, 1e-12)
    lo[-1], hi[-1] = -half, half
    res = [resolution] * f.dim
    return frame, lo, hi, res, ext[-1], tail


def _rearrange_columns(samples, m_out):
    """Sort each row decreasingly and lay it out symmetrically on ``2 m_out + 1`` nodes.

    The centre gets the largest value; node pairs ``+-j`` share the average
    of the next two values, so row sums are preserved exactly.
    """
    rows, k = samples.shape
    srt = -np.sort(-samples, axis=1)
    need = 2 * m_out + 1
    if k < need:
        srt = np.concatenate([srt, np.zeros((rows, need - k))], axis=1)
    elif k > need:
        raise ValueError("column has more samples than the symmetric output holds")
    out = np.empty((rows, need))
    out[:, m_out] = srt[:, 0]
    pairs = 0.5 * (srt[:, 1::2] + srt[:, 2::2])
    out[:, m_out + 1 :] = pairs
    out[:, :m_out] = pairs[:, ::-1]
    return out


def steiner_symmetrize(f, H, resolution=RESOLUTION):
    """Steiner symmetral ``S_H f`` as a grid-backed function in the frame ``(v, u)``."""
    if H.dim != f.dim:
        raise ValueError("dimension mismatch")
    if resolution % 2 == 0:
        raise ValueError("resolution must be odd so the centre is a node")
    grid_in = getattr(f.base, "grid", None) if f.f_valued else None
    if grid_in is not None and _aligned_symmetric(grid_in, H):
        m_out = (grid_in.values.shape[-1] - 1) // 2
        vals = _rearrange_columns(grid_in.values.reshape(-1, grid_in.values.shape[-1]), m_out)
        out = GridFunction(
            grid_in.lo, grid_in.hi, vals.reshape(grid_in.values.shape), frame=H.frame(), tail_mass=grid_in.tail_mass,
            center_kink=True,
        )
        return AlphaConcaveFunction(f.alpha, GridBacked(out, f.alpha), name=_sym_name(f))
    frame, lo, hi, res, (umin, umax), tail = _symmetral_box(f, H, resolution)
    if f.f_valued:
        values = _sampled_symmetral(f, frame, lo, hi, res, umin, umax)
    else:
        # nodes with s >= 0 suffice; the other half is the mirror image
        m_out = (res[-1] - 1) // 2
        half_res = list(res[:-1]) + [m_out + 1]
        half_hi = hi.copy()
        template = GridFunction(np.concatenate([lo[:-1], [0.0]]), half_hi, np.zeros(half_res), frame=frame)
        z = template.node_coordinates(world=False)
        h = z[:, :-1] @ frame[:, :-1].T if f.dim > 1 else np.zeros((len(z), 1))
        half = _symmetral_values(ExactSymmetral(f, H), h, np.abs(z[:, -1])).reshape(half_res)
        values = np.concatenate([half[..., :0:-1], half], axis=-1)
    out = GridFunction(lo, hi, values, frame=frame, tail_mass=tail, center_kink=True)
    return AlphaConcaveFunction(f.alpha, GridBacked(out, f.alpha), name=_sym_name(f))


def _sym_name(f):
    return f"S({f.name})" if f.name else None


def _aligned_symmetric(grid, H):
    frame = H.frame()
    if grid.frame.shape != frame.shape or not np.allclose(np.abs(grid.frame[:, -1] @ frame[:, -1]), 1.0, atol=1e-12):
        return False
    if not np.allclose(grid.frame, frame, atol=1e-12, rtol=0):
        return False
    k = grid.values.shape[-1]
    return k % 2 == 1 and abs(grid.lo[-1] + grid.hi[-1]) <= 1e-12 * (1.0 + abs(grid.hi[-1]))


def _sampled_symmetral(f, frame, lo, hi, res, umin, umax):
    n = len(res)
    m_out = (res[-1] - 1) // 2
    hu = (hi[-1] - lo[-1]) / (res[-1] - 1)
    k = int(math.floor((umax - umin) / hu)) + 1
    taus = umin + hu * np.arange(k)
    grid = getattr(f.base, "grid", None)

    def sample(pts):
        if grid is not None:
            return grid(pts, order=INTERP_ORDER)
        return np.asarray(f(pts), dtype=float)

    if n == 1:
        samples = sample(taus[:, None] * frame[:, 0]).reshape(1, k)
    else:
        a = np.linspace(lo[0], hi[0], res[0])
        pts = a[:, None, None] * frame[:, 0] + taus[None, :, None] * frame[:, 1]
        samples = sample(pts.reshape(-1, 2)).reshape(res[0], k)
    out = _rearrange_columns(samples, m_out)
    return out.reshape(res)


# --------------------------------------------------------------------------
# rearrangement


def rearrange(f):
    """Symmetric decreasing rearrangement ``f*``, radial about the origin."""
    n = f.dim
    kappa = ball_volume(n)
    base = f.base
    if isinstance(base, (RadialBase, TabulatedRadial)) or (
        isinstance(base, Quadratic) and np.allclose(base.Q, base.Q[0, 0] * np.eye(n)) and not np.any(base.center)
    ):
        return f
    name = f"{f.name}*" if f.name else None
    if f.f_valued:
        grid = base.grid
        vals = np.sort(grid.values.reshape(-1))[::-1]
        vals = vals[vals > 0]
        table = TabulatedRadial(n, vals, grid.cell_volume, f.alpha)
        table.source_error = grid.mass()[1]
        return AlphaConcaveFunction(f.alpha, table, name=name)
    if base.is_indicator:
        r = (base.sublevel_volume(0.0) / kappa) ** (1.0 / n)
        return AlphaConcaveFunction(f.alpha, IndicatorOfEllipsoid(np.eye(n) / r**2), height=f.height, name=name)
    if isinstance(base, Quadratic):
        return AlphaConcaveFunction(f.alpha, Quadratic(base.det ** (1.0 / n) * np.eye(n)), name=name)
    if isinstance(base, Cone):
        c = (base.unit_volume / kappa) ** (1.0 / n)
        radial = RadialBase(n, lambda s: c * np.asarray(s, float), lambda r: np.asarray(r, float) / c, label="cone")
        return AlphaConcaveFunction(f.alpha, radial, name=name)
    return AlphaConcaveFunction(f.alpha, _numeric_radial(base, n, kappa), name=name)


def _numeric_radial(base, n, kappa):
    """Radial base from sublevel volumes, inverted by bisection."""
    smin = base.min_value()
    vol = np.vectorize(base.sublevel_volume, otypes=[float])

    def radius(s):
        return (vol(s) / kappa) ** (1.0 / n)

    def value(r):
        r = np.asarray(r, dtype=float)
        target = kappa * r**n
        a = np.full(r.shape, smin)
        b = np.full(r.shape, smin + 1.0)
        grow = vol(b) < target
        while np.any(grow):
            b = np.where(grow, smin + 2.0 * (b - smin), b)
            grow = vol(b) < target
        for _ in range(BISECTION_STEPS):
            mid = 0.5 * (a + b)
            ok = vol(mid) >= target
            b = np.where(ok, mid, b)
            a = np.where(ok, a, mid)
        return np.where(vol(np.full(r.shape, smin)) >= target, smin, b)

    return RadialBase(n, radius, value, min_value=smin, label="numeric")


# --------------------------------------------------------------------------
# sequences and chains


def random_hyperplane_sequence(seed, n, m):
    """``m`` hyperplanes with normals uniform on the sphere, reproducible from ``seed``."""
    if m < 1:
        raise ValueError("m must be at least 1")
    if n == 1:
        return [Hyperplane([1.0]) for _ in range(m)]
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((m, n))
    return [Hyperplane(row / np.linalg.norm(row)) for row in g]


def l1_to(f, target):
    """``||f - target||_1`` for a grid-backed f: box rule on f's nodes plus target mass off the grid."""
    grid = f.base.grid
    nodes = grid.node_coordinates()
    tv = np.asarray(target(nodes), dtype=float)
    dv = grid.cell_volume
    inside = float(np.sum(np.abs(grid.values.reshape(-1) - tv))) * dv
    off = max(total_mass(target).value - float(np.sum(tv)) * dv, 0.0)
    return inside + off


def symmetrization_chain(f, hyperplanes, record=False, resolution=RESOLUTION, target=None):
    """Apply ``S_{H_m} ... S_{H_1}`` left to right.

    Returns the final function and, with ``record``, the L1 distance to
    ``f*`` after each step.
    """
    distances = []
    if record and target is None:
        target = rearrange(f)
    g = f
    for H in hyperplanes:
        g = steiner_symmetrize(g, H, resolution=resolution)
        if record:
            distances.append(l1_to(g, target))
    return g, distances
