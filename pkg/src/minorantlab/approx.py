"""Best alpha-affine minorants, the approximation defect G, and the Macbeath pair.

``best_minorant`` maximizes the exact minorant mass over ``N`` break-point
locations with heights on the graph of f (lowering a lifted point never
shrinks the hull, so free heights cannot do better).  The search is a
multi-start Nelder-Mead over the concatenated coordinates, each point mapped
into the support first.  ``brute_force_minorant`` is the exhaustive grid
oracle used to cross-check it.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from . import kernels
from .functional import INF, RadialBase, TabulatedRadial, phi_inv
from .hull import PointAboveGraph, alpha_minorant_from_points
from .measure import minorant_mass, support_level, total_mass
from .symmetry import ExactSymmetral, chord_arrays, steiner_symmetrize, support_extents

TIE_TOL = 1e-12
CHORD_TOL = 1e-9
GRID_FLOOR = 1e-14
BULK_LEVEL = 3.0


class InvalidN(ValueError):
    """N must be a positive integer."""


class BudgetExceeded(RuntimeError):
    """The exhaustive enumeration is larger than the configured budget."""


class PointOutsideSymmetral(ValueError):
    """A point does not lie in the hypograph of the Steiner symmetral."""


@dataclass
class OptimizerConfig:
    restarts: int = 32
    maxIterations: int = 500
    simplexScale: float = 0.25
    seed: int = 0
    symmetricAnsatz: bool = False
    jobs: int = 1

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be at least 1")


@dataclass
class MinorantSolution:
    minorant: object
    mass: object
    breakPointCount: int
    optimizerGap: float
    trace: list = field(default_factory=list)
    seed: int = 0

    @property
    def points(self):
        return self.minorant.hypograph_points()

    def to_json(self):
        return {
            "mass": self.mass.to_json(),
            "breakPointCount": self.breakPointCount,
            "optimizerGap": self.optimizerGap,
            "seed": self.seed,
            "minorant": self.minorant.to_json(),
            "trace": self.trace,
        }


# --------------------------------------------------------------------------
# search problem


class _Problem:
    """Search region, graph heights and exact mass for break-point sets of f."""

    def __init__(self, f):
        self.f = f
        self.dim = f.dim
        self.alpha = f.alpha
        self.kernel_alpha = 0.0 if f.alpha == INF else f.alpha
        self.scale = f.height if f.alpha == INF else 1.0
        self.region = None
        self.box = None
        if f.f_valued:
            eye = np.eye(self.dim)
            ext, _ = support_extents(f, [eye[k] for k in range(self.dim)])
            self.box = (np.array([e[0] for e in ext]), np.array([e[1] for e in ext]))
            self.floor = GRID_FLOOR * f.max_value()
        elif f.alpha == INF or f.base.is_indicator:
            self.region = f.base.sublevel(0.0)
        elif f.alpha > 0:
            self.region = f.base.sublevel(1.0 / f.alpha)
        else:
            self.region = f.base.sublevel(support_level(f, tail_rel=1e-12)[0])
        if self.region is not None:
            lo, hi = self.region.bbox()
        else:
            lo, hi = self.box
        self.lo, self.hi = np.asarray(lo, float), np.asarray(hi, float)
        self.diameter = float(np.linalg.norm(self.hi - self.lo))
        self.center = np.asarray(f.peak(), dtype=float).reshape(-1)

    def project(self, x):
        x = np.asarray(x, dtype=float).reshape(-1, self.dim)
        if self.region is not None:
            return self.region.project(x)
        return np.clip(x, self.lo, self.hi)

    def heights(self, x):
        """Base values ``t_i`` of graph points over ``x``."""
        f = self.f
        if f.alpha == INF:
            return np.zeros(len(x))
        if f.f_valued:
            y = np.maximum(np.asarray(f(x), dtype=float).reshape(-1), self.floor)
            return np.asarray(phi_inv(f.alpha, y), dtype=float).reshape(-1)
        t = np.asarray(f.base(x), dtype=float).reshape(-1)
        if f.alpha > 0:
            t = np.minimum(t, 1.0 / f.alpha)
        return t

    def mass(self, x):
        x = self.project(x)
        if self.alpha == INF and self.f.f_valued:
            # a multiple of an indicator: the lowest point sets the height
            y = np.asarray(self.f(x), dtype=float).reshape(-1)
            return max(float(y.min()), 0.0) * kernels.minorant_mass(x, np.zeros(len(x)), 0.0), x
        if self.f.f_valued:
            # sampled functions have no base outside their support: drop those points
            y = np.asarray(self.f(x), dtype=float).reshape(-1)
            keep = y > 0
            xs = x[keep]
            t = np.asarray(phi_inv(self.alpha, np.maximum(y[keep], self.floor)), dtype=float).reshape(-1)
            return self.scale * kernels.minorant_mass(xs, t, self.kernel_alpha) if len(xs) else 0.0, x
        t = self.heights(x)
        if not np.all(np.isfinite(t)):
            return 0.0, x
        return self.scale * kernels.minorant_mass(x, t, self.kernel_alpha), x

    def solution_points(self, x):
        """Hypograph points on the graph; points where f vanishes are dropped."""
        x = self.project(x)
        y = np.asarray(self.f(x), dtype=float).reshape(-1)
        # for 0 < alpha < inf a zero height still lifts to the finite level 1/alpha
        keep = y > 0 if (self.alpha <= 0 or self.alpha == INF or self.f.f_valued) else np.ones(len(y), dtype=bool)
        return x[keep], y[keep]

    def random_points(self, rng, count):
        out = np.empty((0, self.dim))
        while len(out) < count:
            cand = self.lo + (self.hi - self.lo) * rng.random((4 * count, self.dim))
            if self.region is not None:
                cand = cand[self.region.contains(cand)]
            else:
                cand = cand[np.asarray(self.f(cand)) > 0]
            out = np.vstack([out, cand])
        return out[:count]

    def ring_points(self, count, fraction=0.5):
        """Evenly spread points around the peak, pulled into the region."""
        half = 0.5 * (self.hi - self.lo)
        mid = 0.5 * (self.hi + self.lo)
        if self.dim == 1:
            pts = np.linspace(self.lo[0] + 0.1 * half[0], self.hi[0] - 0.1 * half[0], count)[:, None]
            return self.project(pts)
        ang = 2 * math.pi * np.arange(count) / count
        pts = mid + fraction * half * np.column_stack([np.cos(ang), np.sin(ang)])
        return self.project(pts)


def _canonical(x):
    """Lexicographically sorted copy, for tie-breaking."""
    x = np.asarray(x, dtype=float)
    order = np.lexsort(x.T[::-1])
    return x[order]


def _local_search(problem, x0, cfg):
    d = problem.dim
    z0 = np.asarray(x0, dtype=float).reshape(-1)
    step = cfg.simplexScale * problem.diameter
    history = []

    def objective(z):
        m, _ = problem.mass(z.reshape(-1, d))
        return -m

    def run(start, scale, iters):
        simplex = np.vstack([start, start + scale * np.eye(len(start))])
        res = minimize(
            objective,
            start,
            method="Nelder-Mead",
            options={
                "initial_simplex": simplex,
                "maxiter": iters,
                "xatol": 1e-10 * max(problem.diameter, 1.0),
                "fatol": 1e-14,
                "adaptive": True,
            },
        )
        history.append(int(res.nit))
        return res

    res = run(z0, step, cfg.maxIterations)
    # polish from the best vertex with a fresh, smaller simplex
    for shrink in (0.1, 0.01):
        res2 = run(res.x, step * shrink, cfg.maxIterations)
        if res2.fun <= res.fun:
            res = res2
    mass, x = problem.mass(res.x.reshape(-1, d))
    return mass, x, sum(history)


def _rank(results):
    """Order restarts by mass (descending); near-ties go to the smaller canonical point list."""
    ordered = sorted(results, key=lambda r: -r["mass"])
    top = ordered[0]["mass"]
    tied = [r for r in ordered if r["mass"] >= top - TIE_TOL]
    tied.sort(key=lambda r: _canonical(r["x"]).reshape(-1).tolist())
    rest = [r for r in ordered if r["mass"] < top - TIE_TOL]
    return tied + rest


def _finish(problem, x, trace, gap, seed):
    xs, ys = problem.solution_points(x)
    if len(xs) == 0:
        xs, ys = problem.center[None, :], np.array([problem.f.max_value()])
    q = alpha_minorant_from_points(problem.f, (xs, ys), check=False)
    mass = minorant_mass(q)
    return MinorantSolution(q, mass, q.break_point_count, gap + mass.error_bound, trace, seed)


def best_minorant(f, N, cfg=None, warm_start=None):
    """Best-found alpha-affine minorant of f with at most N break points."""
    if not isinstance(N, (int, np.integer)) or N < 1:
        raise InvalidN(f"N must be a positive integer, got {N!r}")
    cfg = cfg or OptimizerConfig()
    problem = _Problem(f)
    rng = np.random.default_rng(cfg.seed)
    starts = [problem.ring_points(N)]
    if warm_start is not None:
        ws = np.asarray(warm_start, dtype=float).reshape(-1, f.dim)
        if len(ws) < N:
            ws = np.vstack([ws, problem.random_points(rng, N - len(ws))])
        starts.insert(0, ws[:N])
    while len(starts) < cfg.restarts:
        starts.append(problem.random_points(rng, N))
    starts = starts[: cfg.restarts]

    def one(args):
        k, x0 = args
        mass, x, nit = _local_search(problem, x0, cfg)
        return {"restart": k, "mass": mass, "x": x, "iterations": nit}

    if cfg.jobs > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(one, enumerate(starts)))
    else:
        results = [one(a) for a in enumerate(starts)]
    results.sort(key=lambda r: r["restart"])
    ranked = _rank(results)
    best = ranked[0]
    gap = best["mass"] - ranked[1]["mass"] if len(ranked) > 1 else 0.0
    if cfg.symmetricAnsatz and _is_radial(f):
        sym = _symmetric_ansatz(problem, N)
        if sym is not None and sym["mass"] > best["mass"] + TIE_TOL:
            gap = sym["mass"] - best["mass"]
            best = sym
            results.append(sym)
    trace = [
        {"restart": r["restart"], "mass": r["mass"], "iterations": r.get("iterations", 0)} for r in results
    ]
    return _finish(problem, best["x"], trace, max(gap, 0.0), cfg.seed)


def _is_radial(f):
    b = f.base
    if isinstance(b, (RadialBase, TabulatedRadial)):
        return True
    if hasattr(b, "Q") and hasattr(b, "center"):
        return bool(np.allclose(b.Q, b.Q[0, 0] * np.eye(f.dim)) and not np.any(b.center))
    return f.dim == 1 and np.allclose(f(np.array([[0.3]])), f(np.array([[-0.3]])))


def _symmetric_ansatz(problem, N):
    """Break points on a symmetric orbit about the origin.

    1D: ``+-r_j`` (plus 0 when N is odd), optimized over the radii.
    2D: a regular N-gon, or a regular (N-1)-gon with the centre, over the radius.
    """
    d = problem.dim
    rmax = float(np.max(np.abs(np.vstack([problem.lo, problem.hi]))))
    best = None
    if d == 1:
        k = N // 2
        if k == 0:
            return None

        def layout(r):
            r = np.abs(np.asarray(r, float))
            pts = np.concatenate([-r, r, [0.0]] if N % 2 else [-r, r])
            return pts[:, None]

        def neg(r):
            return -problem.mass(layout(r))[0]

        for frac in (0.3, 0.6, 0.9):
            r0 = frac * rmax * np.arange(1, k + 1) / k
            res = minimize(neg, r0, method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 4000})
            cand = {"restart": -1, "mass": -res.fun, "x": problem.project(layout(res.x))}
            if best is None or cand["mass"] > best["mass"]:
                best = cand
        return best
    layouts = [(N, False)]
    if N >= 4:
        layouts.append((N - 1, True))
    for m, centre in layouts:
        ang = 2 * math.pi * np.arange(m) / m

        def layout(r, ang=ang, centre=centre):
            pts = abs(r) * np.column_stack([np.cos(ang), np.sin(ang)])
            return np.vstack([pts, [[0.0, 0.0]]]) if centre else pts

        def neg(r, layout=layout):
            return -problem.mass(layout(r))[0]

        radii = np.linspace(0.0, rmax, 65)[1:]
        vals = [neg(r) for r in radii]
        i = int(np.argmin(vals))
        lo, hi = radii[max(i - 1, 0)], radii[min(i + 1, len(radii) - 1)]
        res = minimize_scalar(neg, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
        r = res.x if res.fun <= vals[i] else radii[i]
        cand = {"restart": -1, "mass": -neg(r), "x": problem.project(layout(r))}
        if best is None or cand["mass"] > best["mass"]:
            best = cand
    return best


# --------------------------------------------------------------------------
# exhaustive oracle


def brute_force_minorant(f, N, gridResolution=101, budget=5_000_000, zoom_levels=6, free_heights=0):
    """Exhaustive search over break points on a grid covering the support.

    The best coarse configuration is refined by repeated exhaustive searches
    on a finer local grid (``zoom_levels`` rounds, each 21 nodes per
    coordinate over +-2 coarse cells).  With ``free_heights = k`` each point
    may also be lifted to one of ``k`` extra heights above the graph.
    """
    if not isinstance(N, (int, np.integer)) or N < 1:
        raise InvalidN(f"N must be a positive integer, got {N!r}")
    problem = _Problem(f)
    d = f.dim
    axes = [np.linspace(problem.lo[k], problem.hi[k], gridResolution) for k in range(d)]
    nodes = np.stack([m.reshape(-1) for m in np.meshgrid(*axes, indexing="ij")], axis=1)
    if problem.region is not None:
        nodes = nodes[problem.region.contains(nodes)]
    else:
        nodes = nodes[np.asarray(f(nodes)) > 0]
    count = math.comb(len(nodes), N) if N <= len(nodes) else 0
    lifts = (1 + free_heights) ** N
    if count * lifts > budget:
        raise BudgetExceeded(f"{count * lifts} configurations exceed the budget of {budget}")
    if count == 0:
        x = nodes[:N]
        return _finish(problem, x, [], 0.0, 0)
    t_nodes = problem.heights(nodes)
    best_mass, best_idx = -INF, None
    for combo in combinations(range(len(nodes)), N):
        idx = list(combo)
        m = problem.scale * kernels.minorant_mass(nodes[idx], t_nodes[idx], problem.kernel_alpha)
        if m > best_mass + TIE_TOL:
            best_mass, best_idx = m, idx
    x = nodes[best_idx]
    lifted = None
    if free_heights:
        x, lifted, best_mass = _free_height_search(problem, x, free_heights)
    trace = [{"level": 0, "mass": best_mass, "spacing": float(axes[0][1] - axes[0][0])}]
    h = float(np.max([a[1] - a[0] for a in axes]))
    if lifted is None:
        for level in range(1, zoom_levels + 1):
            local = np.linspace(-2 * h, 2 * h, 21)
            x, best_mass = _zoom(problem, x, local)
            h = local[1] - local[0]
            trace.append({"level": level, "mass": best_mass, "spacing": h})
    sol = _finish(problem, x, trace, 0.0, 0)
    if lifted is not None:
        sol.trace.append({"lifted": lifted.tolist()})
    return sol


def _zoom(problem, x, offsets):
    """Exhaustive search over ``x + offsets`` in each coordinate (coordinate blocks of one point at a time)."""
    d = problem.dim
    best_x = x.copy()
    best_mass = problem.mass(best_x)[0]
    # sweep: each point's offsets jointly with its neighbours held fixed, repeated until stable
    for _ in range(4):
        improved = False
        for i in range(len(x)):
            if d == 1:
                cands = best_x[i] + offsets[:, None]
            else:
                ox, oy = np.meshgrid(offsets, offsets, indexing="ij")
                cands = best_x[i] + np.column_stack([ox.reshape(-1), oy.reshape(-1)])
            for c in cands:
                trial = best_x.copy()
                trial[i] = c
                m, tx = problem.mass(trial)
                if m > best_mass + TIE_TOL:
                    best_mass, best_x, improved = m, tx, True
        if not improved:
            break
    return best_x, best_mass


def _free_height_search(problem, x, k):
    """Try lifting each point above the graph; returns the best lift pattern."""
    t0 = problem.heights(x)
    span = np.linspace(0.0, 1.0, k + 1)
    best = (problem.scale * kernels.minorant_mass(x, t0, problem.kernel_alpha), np.zeros(len(x)))
    for lift in np.array(np.meshgrid(*[span] * len(x), indexing="ij")).reshape(len(x), -1).T:
        t = t0 + lift
        if problem.alpha > 0:
            t = np.minimum(t, 1.0 / problem.alpha)
        m = problem.scale * kernels.minorant_mass(x, t, problem.kernel_alpha)
        if m > best[0] + TIE_TOL:
            best = (m, lift)
    return x, best[1], best[0]


# --------------------------------------------------------------------------
# G functional


def g_functional(f, N, cfg=None, solution=None):
    """``J(f) - J(best minorant)`` and its combined uncertainty."""
    sol = solution or best_minorant(f, N, cfg)
    J = total_mass(f)
    value = J.value - sol.mass.value
    gap = sol.optimizerGap + J.error_bound
    return value, gap, sol


# --------------------------------------------------------------------------
# Macbeath pair


@dataclass
class MacbeathPair:
    p: object
    q: object
    r: object
    mass_p: object
    mass_q: object
    mass_r: object

    @property
    def bound(self):
        return self.mass_p.error_bound + 0.5 * (self.mass_q.error_bound + self.mass_r.error_bound)

    @property
    def slack(self):
        """``(J(q) + J(r))/2 - J(p)``; nonnegative up to the bound."""
        return 0.5 * (self.mass_q.value + self.mass_r.value) - self.mass_p.value

    def holds(self, extra=0.0):
        return self.slack >= -(self.bound + extra)


def macbeath_pair(f, H, points, symmetral=None):
    """Lift hypograph points of ``S_H f`` to the minorants ``p_f, q_f, r_f``.

    Each point ``(x, y)`` with ``x = h + s u`` must satisfy
    ``|s| <= (f^+ - f^-)/2`` for the chord of ``hyp(f)`` through ``(h, y)``.
    ``q_f`` uses ``h + (s + m) u`` and ``r_f`` uses ``h + (m - s) u`` with
    ``m`` the chord midpoint, both at height y.
    """
    x = np.asarray([np.atleast_1d(np.asarray(p[0], dtype=float)) for p in points])
    y = np.asarray([float(p[1]) for p in points])
    zero_ok = 0 < f.alpha < INF
    if np.any(y < 0) or (np.any(y == 0) and not zero_ok):
        raise PointOutsideSymmetral("heights must be positive")
    h, s = H.split(x)
    lo, hi = chord_arrays(f, H, h, y)
    if np.any(~(lo <= hi)):
        raise PointOutsideSymmetral("a point lies above the symmetral (empty chord)")
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    excess = np.abs(s) - half
    if np.any(excess > CHORD_TOL * (1.0 + np.abs(half))):
        k = int(np.argmax(excess))
        raise PointOutsideSymmetral(
            f"point {x[k].tolist()} at height {y[k]!r} is {excess[k]!r} outside the symmetral's chord"
        )
    s = np.clip(s, -half, half)
    u = H.normal
    qx = h + (s + mid)[:, None] * u
    rx = h + (mid - s)[:, None] * u
    sym = symmetral or ExactSymmetral(f, H)
    p = alpha_minorant_from_points(sym, (h + s[:, None] * u, y), check=False)
    try:
        q = alpha_minorant_from_points(f, (qx, y))
        r = alpha_minorant_from_points(f, (rx, y))
    except PointAboveGraph as exc:
        raise PointOutsideSymmetral(str(exc)) from None
    return MacbeathPair(p, q, r, minorant_mass(p), minorant_mass(q), minorant_mass(r))


def random_admissible_points(f, H, N, rng, symmetral=None):
    """``N`` random points ``(x, y)`` in the hypograph of ``S_H f``.

    The foot ``h`` on H comes from a random point of f's search region, the
    height ``y`` is a random fraction of the symmetral's value at ``h`` and
    the offset ``s`` is uniform on the chord at that height.
    """
    sym = symmetral or ExactSymmetral(f, H)
    problem = _Problem(f)
    if f.f_valued or f.alpha > 0:
        base = problem.random_points(rng, N)
    else:
        # keep the feet in the bulk; the search region reaches far into the tail
        bulk = f.base.sublevel(f.base.min_value() + BULK_LEVEL)
        lo, hi = (np.asarray(b, dtype=float).reshape(-1) for b in bulk.bbox())
        base = np.empty((0, f.dim))
        while len(base) < N:
            cand = lo + (hi - lo) * rng.random((4 * N, f.dim))
            base = np.vstack([base, cand[bulk.contains(cand)]])
        base = base[:N]
    h, _ = H.split(base)
    top = np.asarray(sym(h), dtype=float).reshape(-1)
    y = top * rng.uniform(0.05, 1.0, N)
    lo, hi = chord_arrays(f, H, h, y)
    half = np.where(lo <= hi, 0.5 * (hi - lo), 0.0)
    s = half * rng.uniform(-1.0, 1.0, N)
    x = h + s[:, None] * H.normal
    return list(zip(x, y))


def _inside_symmetral_support(f, H, x):
    h, s = H.split(x)
    lo, hi = chord_arrays(f, H, h, np.zeros(len(h)))
    with np.errstate(invalid="ignore"):
        return (lo <= hi) & (np.abs(s) <= 0.5 * (hi - lo))


def _pull_into_support(f, H, x, steps=60):
    """Move each point toward the symmetral's peak until it meets the support."""
    h0, _ = H.split(np.asarray(f.peak(), dtype=float).reshape(1, -1))
    c = h0[0]
    lam_in = np.zeros(len(x))
    lam_out = np.ones(len(x))
    for _ in range(steps):
        mid = 0.5 * (lam_in + lam_out)
        ok = _inside_symmetral_support(f, H, c + mid[:, None] * (x - c))
        lam_in = np.where(ok, mid, lam_in)
        lam_out = np.where(ok, lam_out, mid)
    return c + lam_in[:, None] * (x - c)


def steiner_monotonicity_check(f, H, N, cfg=None, resolution=None):
    """Certificate ``max(J(q_f), J(r_f)) >= J(p_f)`` for the best minorant of ``S_H f``.

    The break points found on the symmetral grid are placed on the exact
    graph of ``S_H f`` before lifting, so the certificate does not depend on
    grid accuracy.  Best-found masses on both sides are reported too.
    """
    cfg = cfg or OptimizerConfig()
    kwargs = {} if resolution is None else {"resolution": resolution}
    g = steiner_symmetrize(f, H, **kwargs)
    sym = ExactSymmetral(f, H)
    sol_g = best_minorant(g, N, cfg)
    xs, _ = sol_g.minorant.hypograph_points()
    ys = np.asarray(sym(xs), dtype=float).reshape(-1)
    if 0 < f.alpha < INF and np.any(ys <= 0):
        # grid interpolation can push boundary points just past the support;
        # pull them back onto its boundary, where the height is zero
        out = ys <= 0
        xs = xs.copy()
        xs[out] = _pull_into_support(f, H, xs[out])
        ys[out] = 0.0
    keep = ys > 0 if not 0 < f.alpha < INF else ys >= 0
    pair = macbeath_pair(f, H, list(zip(xs[keep], ys[keep])), symmetral=sym)
    best_q = max(pair.mass_q.value, pair.mass_r.value)
    certificate = best_q >= pair.mass_p.value - pair.bound
    sol_f = best_minorant(f, N, cfg, warm_start=(pair.q if pair.mass_q.value >= pair.mass_r.value else pair.r).hypograph_points()[0])
    return {
        "certificate_ok": bool(certificate and pair.holds()),
        "J_p": pair.mass_p.value,
        "J_q": pair.mass_q.value,
        "J_r": pair.mass_r.value,
        "bound": pair.bound,
        "bestmass_f": sol_f.mass.value,
        # the exact mass of p_f; the grid optimum carries the resampling error
        "bestmass_sym": pair.mass_p.value,
        "bestmass_sym_grid": sol_g.mass.value,
        "gap": sol_f.optimizerGap + sol_g.optimizerGap,
        "pair": pair,
        "solution_f": sol_f,
        "solution_sym": sol_g,
    }
