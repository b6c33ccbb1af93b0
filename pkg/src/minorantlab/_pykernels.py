"""Pure-Python/numpy kernels: lower convex envelopes and exact minorant masses.

Same signatures as the compiled ``_ckernels`` module.  Inputs are float64
arrays; ``alpha`` must be finite.
"""

from itertools import combinations

import numpy as np

from ._affine_integrals import clipped_triangle_integral, segment_integral
from .geometry import convex_hull_2d

PLANE_TOL = 1e-10
COLLINEAR_TOL = 1e-12


def dedupe(x, t):
    """Merge coincident x's, keeping the smallest height.  Order is lexicographic."""
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    keys = np.lexsort(x.T[::-1])
    xs, ts = x[keys], t[keys]
    keep_x, keep_t = [], []
    for xi, ti in zip(xs, ts):
        if keep_x and np.all(xi == keep_x[-1]):
            if ti < keep_t[-1]:
                keep_t[-1] = ti
            continue
        keep_x.append(xi)
        keep_t.append(ti)
    return np.array(keep_x).reshape(-1, x.shape[1]), np.array(keep_t)


def lower_hull_1d(x, t):
    """Indices of the lower hull of ``(x_i, t_i)``; x sorted strictly increasing."""
    n = len(x)
    scale = 1.0 + float(np.max(np.abs(t))) if n else 1.0
    out = []
    for i in range(n):
        while len(out) >= 2:
            a, b = out[-2], out[-1]
            # b is kept only if it lies strictly below the chord from a to i
            chord = t[a] + (t[i] - t[a]) * (x[b] - x[a]) / (x[i] - x[a])
            if t[b] < chord - PLANE_TOL * scale:
                break
            out.pop()
        out.append(i)
    return np.array(out, dtype=np.int64)


def lower_faces_2d(p, t):
    """Triangles of the lower envelope of vertical rays over ``(p_i, t_i)``.

    ``p`` (N, 2) must be free of duplicates.  Coplanar faces are
    triangulated as a fan from their lexicographically smallest vertex.
    Returns an (M, 3) index array, empty when the x's are collinear.
    """
    p = np.asarray(p, dtype=float)
    t = np.asarray(t, dtype=float)
    n = len(p)
    if n < 3:
        return np.zeros((0, 3), dtype=np.int64)
    diam2 = float(np.sum((p.max(axis=0) - p.min(axis=0)) ** 2))
    eps = PLANE_TOL * (1.0 + float(np.max(np.abs(t))))
    tri = np.array(list(combinations(range(n), 3)), dtype=np.int64)
    i, j, k = tri[:, 0], tri[:, 1], tri[:, 2]
    e1 = p[j] - p[i]
    e2 = p[k] - p[i]
    dt1 = t[j] - t[i]
    dt2 = t[k] - t[i]
    nz = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    ok = np.abs(nz) > COLLINEAR_TOL * max(diam2, 1e-300)
    if not np.any(ok):
        return np.zeros((0, 3), dtype=np.int64)
    tri, i, e1, e2, dt1, dt2, nz = tri[ok], i[ok], e1[ok], e2[ok], dt1[ok], dt2[ok], nz[ok]
    nx = e1[:, 1] * dt2 - dt1 * e2[:, 1]
    ny = dt1 * e2[:, 0] - e1[:, 0] * dt2
    rel = p[None, :, :] - p[i][:, None, :]
    relt = t[None, :] - t[i][:, None]
    r = (rel[:, :, 0] * nx[:, None] + rel[:, :, 1] * ny[:, None] + relt * nz[:, None]) / nz[:, None]
    lower = np.all(r >= -eps, axis=1)
    groups = []
    seen = set()
    for row in np.nonzero(lower)[0]:
        members = tuple(np.nonzero(np.abs(r[row]) <= eps)[0])
        if members in seen:
            continue
        seen.add(members)
        groups.append(members)
    faces = []
    for members in sorted(groups):
        idx = np.array(members)
        hull = convex_hull_2d(p[idx], tol=COLLINEAR_TOL * diam2)
        verts = idx[hull]
        for a in range(1, len(verts) - 1):
            faces.append((verts[0], verts[a], verts[a + 1]))
    return np.array(faces, dtype=np.int64).reshape(-1, 3)


def mass_1d(x, t, alpha):
    xu, tu = dedupe(x, t)
    xs = xu[:, 0]
    if len(xs) < 2:
        return 0.0
    idx = lower_hull_1d(xs, tu)
    total = 0.0
    for a, b in zip(idx[:-1], idx[1:]):
        total += segment_integral(alpha, xs[b] - xs[a], tu[a], tu[b])
    return total


def mass_2d(p, t, alpha):
    pu, tu = dedupe(p, t)
    faces = lower_faces_2d(pu, tu)
    total = 0.0
    for a, b, c in faces:
        total += clipped_triangle_integral(
            alpha, tuple(pu[a]), tuple(pu[b]), tuple(pu[c]), tu[a], tu[b], tu[c]
        )
    return total
