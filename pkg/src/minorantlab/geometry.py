"""Small planar geometry helpers: hulls, half-plane clipping, areas, projections."""

import numpy as np

BIG = 1e6


def cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull_2d(points, tol=0.0):
    """Indices of the strict convex hull, counter-clockwise, starting at the
    lexicographically smallest point.  Collinear boundary points are dropped."""
    pts = np.asarray(points, dtype=float)
    order = sorted(range(len(pts)), key=lambda i: (pts[i, 0], pts[i, 1]))
    if len(order) <= 2:
        uniq = []
        for i in order:
            if not uniq or np.any(pts[i] != pts[uniq[-1]]):
                uniq.append(i)
        return uniq

    def half(seq):
        out = []
        for i in seq:
            while len(out) >= 2 and cross(pts[out[-2]], pts[out[-1]], pts[i]) <= tol:
                out.pop()
            out.append(i)
        return out

    lower = half(order)
    upper = half(reversed(order))
    hull = lower[:-1] + upper[:-1]
    return hull


def polygon_area(poly):
    poly = np.asarray(poly, dtype=float)
    if len(poly) < 3:
        return 0.0
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def clip_halfplane(poly, a, b):
    """Sutherland-Hodgman step: keep the part of ``poly`` where ``<a, x> <= b``."""
    out = []
    k = len(poly)
    for i in range(k):
        p, q = poly[i], poly[(i + 1) % k]
        fp = a[0] * p[0] + a[1] * p[1] - b
        fq = a[0] * q[0] + a[1] * q[1] - b
        if fp <= 0.0:
            out.append(p)
        if (fp <= 0.0) != (fq <= 0.0):
            lam = fp / (fp - fq)
            out.append((p[0] + lam * (q[0] - p[0]), p[1] + lam * (q[1] - p[1])))
    return out


def halfspace_polygon(A, b, box=BIG):
    """Vertices (CCW) of ``{x : A x <= b}`` intersected with ``[-box, box]^2``.

    Returns ``(vertices, bounded)``; ``bounded`` is False when the result
    touches the artificial box.
    """
    poly = [(-box, -box), (box, -box), (box, box), (-box, box)]
    for a, bi in zip(np.asarray(A, float), np.asarray(b, float)):
        poly = clip_halfplane(poly, a, bi)
        if not poly:
            return np.zeros((0, 2)), True
    verts = np.array(poly, dtype=float)
    bounded = bool(np.all(np.abs(verts) < 0.5 * box))
    reach = float(np.max(np.abs(verts)))
    if bounded and reach > 0 and 4.0 * reach < 0.5 * box:
        # redo with a tight box; cuts through huge box corners lose digits
        return halfspace_polygon(A, b, box=4.0 * reach)
    return verts, bounded


def polygon_halfspaces(verts):
    """Outward normals ``A`` and offsets ``b`` with ``A x <= b`` for a CCW polygon."""
    verts = np.asarray(verts, dtype=float)
    e = np.roll(verts, -1, axis=0) - verts
    normals = np.column_stack([e[:, 1], -e[:, 0]])
    norms = np.linalg.norm(normals, axis=1)
    normals = normals / norms[:, None]
    offsets = np.einsum("ij,ij->i", normals, verts)
    return normals, offsets


def project_to_polygon(x, verts, normals, offsets):
    """Euclidean projection of points ``x`` (m, 2) onto a convex polygon."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    out = x.copy()
    outside = np.any(x @ normals.T - offsets > 0.0, axis=1)
    if not np.any(outside):
        return out
    xs = x[outside]
    a = verts
    bvec = np.roll(verts, -1, axis=0) - verts
    # distance to each edge segment
    rel = xs[:, None, :] - a[None, :, :]
    lam = np.einsum("mkj,kj->mk", rel, bvec) / np.einsum("kj,kj->k", bvec, bvec)
    lam = np.clip(lam, 0.0, 1.0)
    cand = a[None, :, :] + lam[:, :, None] * bvec[None, :, :]
    d2 = np.sum((cand - xs[:, None, :]) ** 2, axis=2)
    best = np.argmin(d2, axis=1)
    out[outside] = cand[np.arange(len(xs)), best]
    return out


def line_halfspace_interval(h, u, A, b):
    """Parameter interval ``{tau : A (h + tau u) <= b}`` for a batch of base points.

    ``h`` is (m, n) and ``b`` is (k,) or per-line (m, k); returns ``(lo, hi)`` arrays with ``lo > hi`` meaning empty.
    """
    h = np.atleast_2d(h)
    A = np.atleast_2d(A)
    au = A @ u
    rhs = np.atleast_2d(b) - h @ A.T
    lo = np.full(h.shape[0], -np.inf)
    hi = np.full(h.shape[0], np.inf)
    pos = au > 1e-15
    neg = au < -1e-15
    if np.any(pos):
        hi = np.minimum(hi, np.min(rhs[:, pos] / au[pos], axis=1))
    if np.any(neg):
        lo = np.maximum(lo, np.max(rhs[:, neg] / au[neg], axis=1))
    zero = ~(pos | neg)
    if np.any(zero):
        bad = np.any(rhs[:, zero] < 0.0, axis=1)
        lo = np.where(bad, np.inf, lo)
        hi = np.where(bad, -np.inf, hi)
    return lo, hi


def fan_triangles(k):
    return [(0, i, i + 1) for i in range(1, k - 1)]
