# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: lower convex envelopes and exact minorant masses.

Mirrors ``_pykernels`` and ``_affine_integrals`` one to one.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log1p, pow, fabs, INFINITY

cnp.import_array()

cdef double TAYLOR_SPREAD = 1e-2
cdef int TAYLOR_TERMS = 10
cdef double PLANE_TOL = 1e-10
cdef double COLLINEAR_TOL = 1e-12


cdef double _phi(double alpha, double s) noexcept nogil:
    cdef double base
    if s == INFINITY:
        return 0.0
    if alpha == 0.0:
        return exp(-s)
    base = 1.0 - alpha * s
    if base <= 0.0:
        return 0.0
    return pow(base, 1.0 / alpha)


cdef double _phi_deriv(double alpha, int k, double s) noexcept nogil:
    cdef double coef = 1.0, base, expo
    cdef int j
    if alpha == 0.0:
        return (-1.0 if k % 2 else 1.0) * exp(-s)
    for j in range(k):
        coef *= -(1.0 - j * alpha)
    base = 1.0 - alpha * s
    if base <= 0.0:
        expo = 1.0 / alpha - k
        if expo > 0.0:
            return 0.0
        if expo == 0.0:
            return coef
        return INFINITY
    return coef * pow(base, 1.0 / alpha - k)


cdef double _Phi(double alpha, double s) noexcept nogil:
    cdef double base
    if alpha == 0.0:
        return -exp(-s)
    if alpha == -1.0:
        return log1p(s)
    base = 1.0 - alpha * s
    if base <= 0.0:
        return 0.0
    return -pow(base, (1.0 + alpha) / alpha) / (1.0 + alpha)


cdef double _G(double alpha, double s) noexcept nogil:
    cdef double base
    if alpha == 0.0:
        return exp(-s)
    if alpha == -1.0:
        return (1.0 + s) * log1p(s) - s
    if alpha == -0.5:
        return -4.0 * log1p(0.5 * s)
    base = 1.0 - alpha * s
    if base <= 0.0:
        return 0.0
    return pow(base, (1.0 + 2.0 * alpha) / alpha) / ((1.0 + alpha) * (1.0 + 2.0 * alpha))


cdef double _threshold(double alpha, double c) noexcept nogil:
    cdef double dist
    if alpha == 0.0:
        return TAYLOR_SPREAD
    dist = fabs(1.0 / alpha - c)
    return TAYLOR_SPREAD * (dist if dist < 1.0 else 1.0)


cdef double _Phi_dd(double alpha, double a, double b) noexcept nogil:
    cdef double c = 0.5 * (a + b), d = 0.5 * (b - a)
    cdef double total = 0.0, dk = 1.0, fact = 1.0
    cdef int k
    if fabs(b - a) < _threshold(alpha, c):
        for k in range(0, TAYLOR_TERMS, 2):
            total += _phi_deriv(alpha, k, c) * dk / fact
            dk *= d * d
            fact *= (k + 2) * (k + 3)
        return total
    if b == a:
        return _phi(alpha, a)
    return (_Phi(alpha, b) - _Phi(alpha, a)) / (b - a)


cdef double _G_dd1(double alpha, double a, double b) noexcept nogil:
    cdef double c = 0.5 * (a + b), d = 0.5 * (b - a)
    cdef double total, dk, fact
    cdef int k
    if fabs(b - a) < _threshold(alpha, c):
        total = _Phi(alpha, c)
        dk = d * d
        fact = 6.0
        for k in range(2, TAYLOR_TERMS, 2):
            total += _phi_deriv(alpha, k - 1, c) * dk / fact
            dk *= d * d
            fact *= (k + 2) * (k + 3)
        return total
    if b == a:
        return _Phi(alpha, a)
    return (_G(alpha, b) - _G(alpha, a)) / (b - a)


cdef double _G_dd2(double alpha, double u, double v, double w) noexcept nogil:
    cdef double a = u, b = v, c = w, tmp, m, total, fact
    cdef double h[11]
    cdef double dl[3]
    cdef int k, q
    if a > b:
        tmp = a; a = b; b = tmp
    if b > c:
        tmp = b; b = c; c = tmp
    if a > b:
        tmp = a; a = b; b = tmp
    m = (a + b + c) / 3.0
    if c - a < _threshold(alpha, m):
        dl[0] = a - m; dl[1] = b - m; dl[2] = c - m
        h[0] = 1.0
        for k in range(1, TAYLOR_TERMS + 1):
            h[k] = 0.0
        for q in range(3):
            for k in range(1, TAYLOR_TERMS + 1):
                h[k] += dl[q] * h[k - 1]
        total = 0.0
        fact = 2.0
        for k in range(TAYLOR_TERMS + 1):
            total += _phi_deriv(alpha, k, m) * h[k] / fact
            fact *= k + 3
        return total
    if c == a:
        return 0.5 * _phi(alpha, a)
    return (_G_dd1(alpha, b, c) - _G_dd1(alpha, a, b)) / (c - a)


cdef double _segment(double alpha, double length, double u, double v) noexcept nogil:
    cdef double cut, lo, hi
    if length <= 0.0:
        return 0.0
    if alpha > 0.0:
        cut = 1.0 / alpha
        lo = u if u < v else v
        hi = v if u < v else u
        if lo >= cut:
            return 0.0
        if hi > cut:
            length = length * (cut - lo) / (hi - lo)
            u = lo
            v = cut
    return length * _Phi_dd(alpha, u, v)


cdef double _tri(double alpha, double ax, double ay, double fa, double bx, double by,
                 double fb, double cx, double cy, double fc) noexcept nogil:
    cdef double area = 0.5 * fabs((bx - ax) * (cy - ay) - (cx - ax) * (by - ay))
    if area <= 0.0:
        return 0.0
    return 2.0 * area * _G_dd2(alpha, fa, fb, fc)


cdef double _clipped_triangle(double alpha, double* px, double* py, double* pf) noexcept nogil:
    cdef double cut, lam, total = 0.0
    cdef double qx[4]
    cdef double qy[4]
    cdef double qf[4]
    cdef int i, nxt, m = 0
    if alpha > 0.0:
        cut = 1.0 / alpha
        if pf[0] > cut or pf[1] > cut or pf[2] > cut:
            for i in range(3):
                nxt = (i + 1) % 3
                if pf[i] <= cut:
                    qx[m] = px[i]; qy[m] = py[i]; qf[m] = pf[i]; m += 1
                if (pf[i] <= cut) != (pf[nxt] <= cut):
                    lam = (cut - pf[i]) / (pf[nxt] - pf[i])
                    qx[m] = px[i] + lam * (px[nxt] - px[i])
                    qy[m] = py[i] + lam * (py[nxt] - py[i])
                    qf[m] = cut
                    m += 1
            for i in range(1, m - 1):
                total += _tri(alpha, qx[0], qy[0], qf[0], qx[i], qy[i], qf[i],
                              qx[i + 1], qy[i + 1], qf[i + 1])
            return total
    return _tri(alpha, px[0], py[0], pf[0], px[1], py[1], pf[1], px[2], py[2], pf[2])


def segment_integral(double alpha, double length, double u, double v):
    return _segment(alpha, length, u, v)


def clipped_triangle_integral(double alpha, p0, p1, p2, double u, double v, double w):
    cdef double px[3]
    cdef double py[3]
    cdef double pf[3]
    px[0] = p0[0]; py[0] = p0[1]; pf[0] = u
    px[1] = p1[0]; py[1] = p1[1]; pf[1] = v
    px[2] = p2[0]; py[2] = p2[1]; pf[2] = w
    return _clipped_triangle(alpha, px, py, pf)


def dedupe(x, t):
    """Merge coincident x's, keeping the smallest height.  Order is lexicographic."""
    x = np.asarray(x, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    keys = np.lexsort(x.T[::-1])
    cdef double[:, :] xs = np.ascontiguousarray(x[keys])
    cdef double[:] ts = np.ascontiguousarray(t[keys])
    cdef Py_ssize_t n = xs.shape[0], d = xs.shape[1], i, j, m = 0
    out_x = np.empty((n, d))
    out_t = np.empty(n)
    cdef double[:, :] ox = out_x
    cdef double[:] ot = out_t
    cdef bint same
    for i in range(n):
        same = m > 0
        if same:
            for j in range(d):
                if xs[i, j] != ox[m - 1, j]:
                    same = False
                    break
        if same:
            if ts[i] < ot[m - 1]:
                ot[m - 1] = ts[i]
            continue
        for j in range(d):
            ox[m, j] = xs[i, j]
        ot[m] = ts[i]
        m += 1
    return out_x[:m], out_t[:m]


cdef Py_ssize_t _lower_hull_1d(double[:] x, double[:] t, Py_ssize_t[:] out) noexcept nogil:
    cdef Py_ssize_t n = x.shape[0], i, a, b, m = 0
    cdef double scale = 1.0, chord, mx = 0.0
    for i in range(n):
        if fabs(t[i]) > mx:
            mx = fabs(t[i])
    scale += mx
    for i in range(n):
        while m >= 2:
            a = out[m - 2]
            b = out[m - 1]
            chord = t[a] + (t[i] - t[a]) * (x[b] - x[a]) / (x[i] - x[a])
            if t[b] < chord - PLANE_TOL * scale:
                break
            m -= 1
        out[m] = i
        m += 1
    return m


def lower_hull_1d(x, t):
    """Indices of the lower hull of ``(x_i, t_i)``; x sorted strictly increasing."""
    cdef double[:] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef double[:] tv = np.ascontiguousarray(t, dtype=np.float64)
    out = np.empty(xv.shape[0], dtype=np.intp)
    cdef Py_ssize_t m = _lower_hull_1d(xv, tv, out)
    return out[:m].astype(np.int64)


cdef inline double _cross(double ox, double oy, double ax, double ay, double bx, double by) noexcept nogil:
    return (ax - ox) * (by - oy) - (ay - oy) * (bx - ox)


def lower_faces_2d(p, t):
    """Triangles of the lower envelope of vertical rays over ``(p_i, t_i)``.

    Same contract as the pure-Python version: duplicates removed beforehand,
    coplanar faces fan-triangulated from their lexicographically smallest vertex.
    """
    cdef double[:, :] P = np.ascontiguousarray(p, dtype=np.float64)
    cdef double[:] T = np.ascontiguousarray(t, dtype=np.float64)
    cdef Py_ssize_t n = P.shape[0]
    if n < 3:
        return np.zeros((0, 3), dtype=np.int64)
    cdef Py_ssize_t i, j, k, q, c, hm
    cdef double xmin = P[0, 0], xmax = P[0, 0], ymin = P[0, 1], ymax = P[0, 1], tmax = 0.0
    for q in range(n):
        xmin = min(xmin, P[q, 0]); xmax = max(xmax, P[q, 0])
        ymin = min(ymin, P[q, 1]); ymax = max(ymax, P[q, 1])
        tmax = max(tmax, fabs(T[q]))
    cdef double diam2 = (xmax - xmin) ** 2 + (ymax - ymin) ** 2
    cdef double eps = PLANE_TOL * (1.0 + tmax)
    cdef double coltol = COLLINEAR_TOL * diam2
    cdef double e1x, e1y, e2x, e2y, d1, d2, nx, ny, nz, r
    cdef bint is_lower
    pn = np.asarray(P)
    member = np.zeros(n, dtype=np.uint8)
    cdef unsigned char[:] mem = member
    seen = set()
    groups = []
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                e1x = P[j, 0] - P[i, 0]; e1y = P[j, 1] - P[i, 1]
                e2x = P[k, 0] - P[i, 0]; e2y = P[k, 1] - P[i, 1]
                nz = e1x * e2y - e1y * e2x
                if fabs(nz) <= coltol:
                    continue
                d1 = T[j] - T[i]; d2 = T[k] - T[i]
                nx = e1y * d2 - d1 * e2y
                ny = d1 * e2x - e1x * d2
                is_lower = True
                for q in range(n):
                    r = ((P[q, 0] - P[i, 0]) * nx + (P[q, 1] - P[i, 1]) * ny
                         + (T[q] - T[i]) * nz) / nz
                    if r < -eps:
                        is_lower = False
                        break
                    mem[q] = 1 if fabs(r) <= eps else 0
                if not is_lower:
                    continue
                key = bytes(member)
                if key in seen:
                    continue
                seen.add(key)
                groups.append(tuple(np.nonzero(member)[0]))
    faces = []
    cdef Py_ssize_t[:] idx
    cdef Py_ssize_t[:] hull
    for members in sorted(groups):
        idx = np.array(members, dtype=np.intp)
        m = idx.shape[0]
        # lexicographic order of the members
        sub = pn[np.asarray(idx)]
        order = [int(a) for a in np.lexsort((sub[:, 1], sub[:, 0]))]
        hull = np.empty(2 * m + 1, dtype=np.intp)
        hm = 0
        for a in order:
            while hm >= 2 and _cross(P[idx[hull[hm - 2]], 0], P[idx[hull[hm - 2]], 1],
                                     P[idx[hull[hm - 1]], 0], P[idx[hull[hm - 1]], 1],
                                     P[idx[a], 0], P[idx[a], 1]) <= coltol:
                hm -= 1
            hull[hm] = a
            hm += 1
        lower_len = hm
        for a in reversed(order[:-1]):
            while hm >= lower_len + 1 and _cross(P[idx[hull[hm - 2]], 0], P[idx[hull[hm - 2]], 1],
                                                 P[idx[hull[hm - 1]], 0], P[idx[hull[hm - 1]], 1],
                                                 P[idx[a], 0], P[idx[a], 1]) <= coltol:
                hm -= 1
            hull[hm] = a
            hm += 1
        # drop the repeated start point
        verts = [idx[hull[c]] for c in range(hm - 1)]
        for c in range(1, len(verts) - 1):
            faces.append((verts[0], verts[c], verts[c + 1]))
    return np.array(faces, dtype=np.int64).reshape(-1, 3)


def mass_1d(x, t, double alpha):
    xu, tu = dedupe(x, t)
    cdef double[:] xs = np.ascontiguousarray(xu[:, 0])
    cdef double[:] ts = np.ascontiguousarray(tu)
    cdef Py_ssize_t n = xs.shape[0], m, q
    if n < 2:
        return 0.0
    out = np.empty(n, dtype=np.intp)
    cdef Py_ssize_t[:] ov = out
    m = _lower_hull_1d(xs, ts, ov)
    cdef double total = 0.0
    for q in range(m - 1):
        total += _segment(alpha, xs[ov[q + 1]] - xs[ov[q]], ts[ov[q]], ts[ov[q + 1]])
    return total


def mass_2d(p, t, double alpha):
    pu, tu = dedupe(p, t)
    faces = lower_faces_2d(pu, tu)
    cdef double[:, :] P = np.ascontiguousarray(pu)
    cdef double[:] T = np.ascontiguousarray(tu)
    cdef cnp.int64_t[:, :] F = np.ascontiguousarray(faces, dtype=np.int64)
    cdef Py_ssize_t q, c
    cdef double total = 0.0
    cdef double px[3]
    cdef double py[3]
    cdef double pf[3]
    for q in range(F.shape[0]):
        for c in range(3):
            px[c] = P[F[q, c], 0]; py[c] = P[F[q, c], 1]; pf[c] = T[F[q, c]]
        total += _clipped_triangle(alpha, px, py, pf)
    return total
