"""Scalar closed forms for integrals of ``phi_alpha(l(x))`` over segments and triangles.

Here ``phi_alpha(s) = (1 - alpha*s)_+^(1/alpha)`` for ``alpha != 0`` and
``exp(-s)`` for ``alpha == 0``.  For an affine ``l`` with vertex values
``u, v, w`` on a triangle ``T``

    int_T phi(l) = 2 |T| * G[u, v, w]

where ``G'' = phi`` and ``G[.,.,.]`` is the second divided difference.  On a
segment of length ``L`` the integral is ``L * Phi[u, v]`` with ``Phi' = phi``.
Close arguments switch to a Taylor series of the divided difference.

This module is the reference implementation; ``_ckernels.pyx`` mirrors it.
"""

import math

TAYLOR_SPREAD = 1e-2
TAYLOR_TERMS = 10


def phi(alpha, s):
    if s == math.inf:
        return 0.0
    if alpha == 0.0:
        return math.exp(-s)
    base = 1.0 - alpha * s
    if base <= 0.0:
        return 0.0
    return base ** (1.0 / alpha)


def phi_deriv(alpha, k, s):
    """k-th derivative of ``phi_alpha`` at ``s`` (inside the support)."""
    if alpha == 0.0:
        return (-1.0) ** k * math.exp(-s)
    coef = 1.0
    for j in range(k):
        coef *= -(1.0 - j * alpha)
    base = 1.0 - alpha * s
    if base <= 0.0:
        # only reached for alpha > 0 at the cut; derivatives of order < 1/alpha vanish
        expo = 1.0 / alpha - k
        if expo > 0.0:
            return 0.0
        if expo == 0.0:
            return coef
        return math.inf
    return coef * base ** (1.0 / alpha - k)


def Phi(alpha, s):
    """Antiderivative of ``phi_alpha``."""
    if alpha == 0.0:
        return -math.exp(-s)
    if alpha == -1.0:
        return math.log1p(s)
    base = 1.0 - alpha * s
    if base <= 0.0:
        return 0.0
    return -(base ** ((1.0 + alpha) / alpha)) / (1.0 + alpha)


def G(alpha, s):
    """Second antiderivative of ``phi_alpha``."""
    if alpha == 0.0:
        return math.exp(-s)
    if alpha == -1.0:
        return (1.0 + s) * math.log1p(s) - s
    if alpha == -0.5:
        return -4.0 * math.log1p(0.5 * s)
    base = 1.0 - alpha * s
    if base <= 0.0:
        return 0.0
    return base ** ((1.0 + 2.0 * alpha) / alpha) / ((1.0 + alpha) * (1.0 + 2.0 * alpha))


def _threshold(alpha, c):
    if alpha == 0.0:
        return TAYLOR_SPREAD
    dist = abs(1.0 / alpha - c)
    return TAYLOR_SPREAD * min(1.0, dist)


def _Phi_dd(alpha, a, b):
    """First divided difference ``Phi[a, b]``."""
    c = 0.5 * (a + b)
    d = 0.5 * (b - a)
    if abs(b - a) < _threshold(alpha, c):
        total = 0.0
        dk = 1.0
        fact = 1.0
        for k in range(0, TAYLOR_TERMS, 2):
            # fact = (k+1)!
            total += phi_deriv(alpha, k, c) * dk / fact
            dk *= d * d
            fact *= (k + 2) * (k + 3)
        return total
    if b == a:
        return phi(alpha, a)
    return (Phi(alpha, b) - Phi(alpha, a)) / (b - a)


def _G_dd1(alpha, a, b):
    """First divided difference ``G[a, b]`` (note ``G' = Phi``)."""
    c = 0.5 * (a + b)
    d = 0.5 * (b - a)
    if abs(b - a) < _threshold(alpha, c):
        total = Phi(alpha, c)
        dk = d * d
        fact = 6.0
        for k in range(2, TAYLOR_TERMS, 2):
            total += phi_deriv(alpha, k - 1, c) * dk / fact
            dk *= d * d
            fact *= (k + 2) * (k + 3)
        return total
    if b == a:
        return Phi(alpha, a)
    return (G(alpha, b) - G(alpha, a)) / (b - a)


def _complete_homogeneous(deltas, kmax):
    h = [1.0] + [0.0] * kmax
    for x in deltas:
        for k in range(1, kmax + 1):
            h[k] += x * h[k - 1]
    return h


def _G_dd2(alpha, u, v, w):
    a, b, c = sorted((u, v, w))
    m = (a + b + c) / 3.0
    if c - a < _threshold(alpha, m):
        h = _complete_homogeneous((a - m, b - m, c - m), TAYLOR_TERMS)
        total = 0.0
        fact = 2.0
        for k in range(TAYLOR_TERMS + 1):
            total += phi_deriv(alpha, k, m) * h[k] / fact
            fact *= k + 3
        return total
    if c == a:
        return 0.5 * phi(alpha, a)
    return (_G_dd1(alpha, b, c) - _G_dd1(alpha, a, b)) / (c - a)


def segment_integral(alpha, length, u, v):
    """Integral of ``phi_alpha`` of an affine function over a segment.

    ``u`` and ``v`` are the endpoint values; ``length`` the segment length.
    For ``alpha > 0`` the part where ``l > 1/alpha`` is clipped away.
    """
    if length <= 0.0:
        return 0.0
    if alpha > 0.0:
        cut = 1.0 / alpha
        lo, hi = min(u, v), max(u, v)
        if lo >= cut:
            return 0.0
        if hi > cut:
            length = length * (cut - lo) / (hi - lo)
            u, v = lo, cut
    return length * _Phi_dd(alpha, u, v)


def triangle_integral(alpha, area, u, v, w):
    """Integral of ``phi_alpha`` of an affine function over a triangle (unclipped)."""
    if area <= 0.0:
        return 0.0
    return 2.0 * area * _G_dd2(alpha, u, v, w)


def clipped_triangle_integral(alpha, p0, p1, p2, u, v, w):
    """Triangle integral with the ``(.)_+`` truncation applied for ``alpha > 0``.

    ``p0, p1, p2`` are 2D vertices (tuples) carrying affine values ``u, v, w``.
    """
    verts = [(p0, u), (p1, v), (p2, w)]
    if alpha > 0.0:
        cut = 1.0 / alpha
        if max(u, v, w) > cut:
            poly = []
            for i in range(3):
                (pa, fa), (pb, fb) = verts[i], verts[(i + 1) % 3]
                if fa <= cut:
                    poly.append((pa, fa))
                if (fa <= cut) != (fb <= cut):
                    lam = (cut - fa) / (fb - fa)
                    q = (pa[0] + lam * (pb[0] - pa[0]), pa[1] + lam * (pb[1] - pa[1]))
                    poly.append((q, cut))
            total = 0.0
            for i in range(1, len(poly) - 1):
                total += _tri(alpha, poly[0], poly[i], poly[i + 1])
            return total
    return _tri(alpha, *verts)


def _tri(alpha, a, b, c):
    (pa, fa), (pb, fb), (pc, fc) = a, b, c
    area = 0.5 * abs((pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1]))
    return triangle_integral(alpha, area, fa, fb, fc)
