"""Exact descriptors of convex sets in dimension 1 or 2.

Superlevel sets of catalog functions are reported as one of these; each
supports volume, membership, bounding box, projection and chords along lines.
"""

import math

import numpy as np

from .geometry import (
    line_halfspace_interval,
    polygon_area,
    polygon_halfspaces,
    project_to_polygon,
)


def ball_volume(n):
    """Volume of the Euclidean unit ball in R^n."""
    return math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0)


class ConvexSet:
    dim = None

    def volume(self):
        raise NotImplementedError

    def contains(self, x, tol=1e-12):
        raise NotImplementedError

    def bbox(self):
        raise NotImplementedError

    def project(self, x):
        raise NotImplementedError

    def extent(self, d):
        """``(min, max)`` of ``<x, d>`` over the set."""
        raise NotImplementedError

    def chord(self, h, u):
        """Parameter interval of ``{tau : h + tau u in set}`` for base points ``h`` (m, n)."""
        raise NotImplementedError

    @property
    def is_empty(self):
        return False


class EmptySet(ConvexSet):
    def __init__(self, dim):
        self.dim = dim

    def volume(self):
        return 0.0

    def contains(self, x, tol=1e-12):
        return np.zeros(np.atleast_2d(x).shape[0], dtype=bool)

    def bbox(self):
        return None

    def project(self, x):
        raise ValueError("cannot project onto the empty set")

    def extent(self, d):
        return None

    def chord(self, h, u):
        m = np.atleast_2d(h).shape[0]
        return np.full(m, np.inf), np.full(m, -np.inf)

    @property
    def is_empty(self):
        return True

    def __repr__(self):
        return "EmptySet()"


class Interval(ConvexSet):
    dim = 1

    def __init__(self, lo, hi):
        self.lo = float(lo)
        self.hi = float(hi)

    def volume(self):
        return max(self.hi - self.lo, 0.0)

    def contains(self, x, tol=1e-12):
        x = np.asarray(x, dtype=float).reshape(-1)
        pad = tol * (1.0 + abs(self.lo) + abs(self.hi))
        return (x >= self.lo - pad) & (x <= self.hi + pad)

    def bbox(self):
        return np.array([self.lo]), np.array([self.hi])

    def project(self, x):
        return np.clip(np.asarray(x, dtype=float).reshape(-1, 1), self.lo, self.hi)

    def extent(self, d):
        d = float(np.asarray(d).reshape(-1)[0])
        a, b = self.lo * d, self.hi * d
        return min(a, b), max(a, b)

    def chord(self, h, u):
        h = np.asarray(h, dtype=float).reshape(-1)
        u = float(np.asarray(u).reshape(-1)[0])
        a = (self.lo - h) / u
        b = (self.hi - h) / u
        return np.minimum(a, b), np.maximum(a, b)

    def __repr__(self):
        return f"Interval({self.lo!r}, {self.hi!r})"


class Polygon(ConvexSet):
    dim = 2

    def __init__(self, vertices):
        self.vertices = np.asarray(vertices, dtype=float).reshape(-1, 2)
        if len(self.vertices) >= 3:
            self.normals, self.offsets = polygon_halfspaces(self.vertices)
        else:
            self.normals, self.offsets = np.zeros((0, 2)), np.zeros(0)

    def volume(self):
        return polygon_area(self.vertices)

    def contains(self, x, tol=1e-12):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        scale = 1.0 + float(np.max(np.abs(self.vertices)))
        return np.all(x @ self.normals.T - self.offsets <= tol * scale, axis=1)

    def bbox(self):
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def project(self, x):
        return project_to_polygon(x, self.vertices, self.normals, self.offsets)

    def extent(self, d):
        h = self.vertices @ np.asarray(d, dtype=float)
        return float(h.min()), float(h.max())

    def chord(self, h, u):
        return line_halfspace_interval(np.atleast_2d(h), np.asarray(u, float), self.normals, self.offsets)

    def __repr__(self):
        return f"Polygon({self.vertices.tolist()!r})"


class Ellipse(ConvexSet):
    """``{x : (x - c)^T Q (x - c) <= r2}`` in the plane."""

    dim = 2

    def __init__(self, Q, center, r2=1.0):
        self.Q = np.asarray(Q, dtype=float)
        self.center = np.asarray(center, dtype=float)
        self.r2 = float(r2)

    def volume(self):
        return math.pi * self.r2 / math.sqrt(np.linalg.det(self.Q))

    def contains(self, x, tol=1e-12):
        d = np.atleast_2d(x) - self.center
        return np.einsum("ij,jk,ik->i", d, self.Q, d) <= self.r2 * (1.0 + tol) + tol

    def bbox(self):
        # support function of the ellipse along the axes
        Qinv = np.linalg.inv(self.Q)
        half = np.sqrt(self.r2 * np.diag(Qinv))
        return self.center - half, self.center + half

    def project(self, x):
        # radial retraction toward the center (not the Euclidean projection)
        d = np.atleast_2d(np.asarray(x, dtype=float)) - self.center
        q = np.einsum("ij,jk,ik->i", d, self.Q, d)
        scale = np.where(q > self.r2, np.sqrt(self.r2 / np.maximum(q, 1e-300)), 1.0)
        return self.center + d * scale[:, None]

    def extent(self, d):
        d = np.asarray(d, dtype=float)
        c = float(self.center @ d)
        w = math.sqrt(self.r2 * float(d @ np.linalg.solve(self.Q, d)))
        return c - w, c + w

    def chord(self, h, u):
        d = np.atleast_2d(h) - self.center
        u = np.asarray(u, dtype=float)
        a = u @ self.Q @ u
        b = d @ self.Q @ u
        c = np.einsum("ij,jk,ik->i", d, self.Q, d) - self.r2
        disc = b * b - a * c
        root = np.sqrt(np.maximum(disc, 0.0))
        lo = np.where(disc >= 0.0, (-b - root) / a, np.inf)
        hi = np.where(disc >= 0.0, (-b + root) / a, -np.inf)
        return lo, hi

    def __repr__(self):
        return f"Ellipse(Q={self.Q.tolist()!r}, center={self.center.tolist()!r}, r2={self.r2!r})"


def Ball(center, radius):
    center = np.asarray(center, dtype=float).reshape(-1)
    if center.size == 1:
        return Interval(center[0] - radius, center[0] + radius)
    return Ellipse(np.eye(2), center, radius * radius)


class GridMask(ConvexSet):
    """Superlevel set of a sampled function, stored as a node mask."""

    def __init__(self, grid, mask):
        self.grid = grid
        self.mask = np.asarray(mask, dtype=bool)
        self.dim = grid.dim

    def volume(self):
        return float(np.count_nonzero(self.mask)) * self.grid.cell_volume

    def volume_error(self):
        """Half-cell bound: boundary nodes may be misclassified."""
        m = self.mask
        boundary = np.zeros_like(m)
        for ax in range(m.ndim):
            boundary |= m != np.roll(m, 1, axis=ax)
        return 0.5 * float(np.count_nonzero(boundary)) * self.grid.cell_volume

    def contains(self, x, tol=0.0):
        idx = self.grid.nearest_index(x)
        return self.mask[tuple(idx.T)]

    def bbox(self):
        pts = self.grid.node_coordinates()[self.mask.reshape(-1)]
        if len(pts) == 0:
            return None
        return pts.min(axis=0), pts.max(axis=0)

    def project(self, x):
        raise NotImplementedError("grid masks do not support projection")

    def extent(self, d):
        pts = self.grid.node_coordinates()[self.mask.reshape(-1)]
        if len(pts) == 0:
            return None
        h = pts @ np.asarray(d, dtype=float)
        return float(h.min()), float(h.max())

    def chord(self, h, u):
        raise NotImplementedError("use the grid function's chord search")

    @property
    def is_empty(self):
        return not np.any(self.mask)
