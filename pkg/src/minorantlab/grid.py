"""Sampled nonnegative functions on regular grids, with file formats.

A ``GridFunction`` samples a function at the nodes of a box that is
axis-aligned in its own orthonormal ``frame`` (columns are the grid axes in
world coordinates).  Steiner symmetrization produces grids whose last axis is
the symmetrization direction.

Binary layout (``.grid``), all little-endian 64-bit: ``dim`` (int), ``lo``
and ``hi`` (``dim`` floats each), ``resolution`` (``dim`` ints), then the
samples in row-major order.  Only identity frames are written: frames that
permute or flip axes are transposed exactly, other rotations are resampled.
"""

import json
import struct
from pathlib import Path

import numpy as np
from scipy import ndimage


class GridFunction:
    """Nonnegative samples on the nodes of a (possibly rotated) box.

    Parameters
    ----------
    lo, hi : array_like
        Box corners in frame coordinates; nodes include both ends.
    values : ndarray
        Samples, shape ``resolution``.
    frame : ndarray, optional
        Orthonormal matrix whose columns are the grid axes.  Identity by default.
    tail_mass : float
        Declared bound on the mass of the sampled function outside the box.
    center_kink : bool
        The samples are even along the last axis about its middle node and may
        have a derivative jump there (Steiner symmetrals do).  The mass rule
        then adds the matching end correction on both half-columns.
    """

    def __init__(self, lo, hi, values, frame=None, tail_mass=0.0, center_kink=False):
        self.lo = np.asarray(lo, dtype=float).reshape(-1)
        self.hi = np.asarray(hi, dtype=float).reshape(-1)
        self.values = np.asarray(values, dtype=float)
        self.dim = self.lo.size
        if self.values.ndim != self.dim:
            raise ValueError("values must have one axis per dimension")
        if np.any(~np.isfinite(self.values)) or np.any(self.values < 0.0):
            raise ValueError("grid values must be finite and nonnegative")
        if np.any(np.array(self.values.shape) < 2):
            raise ValueError("need at least two samples per axis")
        self.frame = np.eye(self.dim) if frame is None else np.asarray(frame, dtype=float)
        self.tail_mass = float(tail_mass)
        self.center_kink = bool(center_kink)

    @property
    def resolution(self):
        return self.values.shape

    @property
    def spacing(self):
        return (self.hi - self.lo) / (np.array(self.values.shape) - 1)

    @property
    def cell_volume(self):
        return float(np.prod(self.spacing))

    def is_axis_aligned(self):
        return np.allclose(self.frame, np.eye(self.dim), atol=0.0, rtol=0.0)

    def axis(self, k):
        return np.linspace(self.lo[k], self.hi[k], self.values.shape[k])

    def node_coordinates(self, world=True):
        axes = [self.axis(k) for k in range(self.dim)]
        mesh = np.meshgrid(*axes, indexing="ij")
        z = np.stack([m.reshape(-1) for m in mesh], axis=1)
        return z @ self.frame.T if world else z

    def to_frame(self, x):
        return np.atleast_2d(np.asarray(x, dtype=float)) @ self.frame

    def fractional_index(self, x):
        return (self.to_frame(x) - self.lo) / self.spacing

    def nearest_index(self, x):
        idx = np.rint(self.fractional_index(x)).astype(int)
        return np.clip(idx, 0, np.array(self.values.shape) - 1)

    def __call__(self, x, order=1):
        """Interpolated values at world points ``x``; zero outside the box."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1 and x.size == self.dim
        fi = self.fractional_index(x.reshape(-1, self.dim))
        out = ndimage.map_coordinates(self.values, fi.T, order=order, mode="constant", cval=0.0)
        out = np.maximum(out, 0.0)
        return float(out[0]) if single else out

    def mass(self):
        """Box-rule mass and an a-posteriori error bound.

        The bound compares against the rule on every other node, adds half a
        cell for every sample next to a jump to zero (indicator edges, where
        the two rules can agree by accident) and the declared tail mass.
        """
        total = self._box_rule(self.values, self.spacing)
        coarse_slice = tuple(slice(None, None, 2) for _ in range(self.dim))
        coarse = self._box_rule(self.values[coarse_slice], 2.0 * self.spacing)
        return total, abs(total - coarse) + self._jump_term() + self.tail_mass

    def _jump_term(self):
        v = self.values
        jump = 0.0
        for k in range(self.dim):
            a = np.moveaxis(v, k, 0)
            lo, hi = a[:-1], a[1:]
            edge = (lo > 0) != (hi > 0)
            jump += float(np.sum(np.maximum(lo, hi)[edge]))
        return 0.5 * jump * self.cell_volume

    def _box_rule(self, v, spacing):
        total = float(np.sum(v)) * float(np.prod(spacing))
        k = v.shape[-1]
        if self.center_kink and k % 2 == 1 and k >= 5:
            # Euler-Maclaurin end terms at a kink: + h^2/6 f'(0+) per column
            m = (k - 1) // 2
            h = spacing[-1]
            slope = (-3.0 * v[..., m] + 4.0 * v[..., m + 1] - v[..., m + 2]) / (2.0 * h)
            total += float(np.sum(slope)) * h * h / 6.0 * float(np.prod(spacing[:-1]))
        return total

    def max_value(self):
        return float(self.values.max())

    def argmax(self):
        k = np.unravel_index(np.argmax(self.values), self.values.shape)
        z = np.array([self.axis(d)[k[d]] for d in range(self.dim)])
        return self.frame @ z

    def _signed_permutation(self):
        q = np.rint(self.frame)
        if not np.array_equal(np.abs(q).sum(axis=0), np.ones(self.dim)) or np.max(np.abs(self.frame - q)) > 1e-15:
            return None
        target = np.argmax(np.abs(q), axis=0)
        if len(set(target.tolist())) != self.dim:
            return None
        return target, q[target, np.arange(self.dim)]

    def world_bbox(self, threshold=0.0):
        """World-coordinate bounding box of nodes with value above ``threshold``."""
        mask = self.values.reshape(-1) > threshold
        pts = self.node_coordinates()[mask]
        if len(pts) == 0:
            return None
        return pts.min(axis=0), pts.max(axis=0)

    def resampled(self, lo, hi, resolution, frame=None, order=1):
        """Sample this grid's interpolant on a new grid."""
        target = GridFunction(lo, hi, np.zeros(tuple(resolution)), frame=frame)
        vals = self(target.node_coordinates(), order=order).reshape(tuple(resolution))
        return GridFunction(lo, hi, vals, frame=frame, tail_mass=self.tail_mass)

    def axis_aligned(self):
        if self.is_axis_aligned():
            return self
        perm = self._signed_permutation()
        if perm is not None:
            # x[target[k]] = sign[k] * z[k]: transpose and flip, no resampling
            target, sign = perm
            order = np.argsort(target)
            vals = np.transpose(self.values, order)
            lo, hi = np.empty(self.dim), np.empty(self.dim)
            for j, k in enumerate(order):
                if sign[k] < 0:
                    vals = np.flip(vals, axis=j)
                    lo[j], hi[j] = -self.hi[k], -self.lo[k]
                else:
                    lo[j], hi[j] = self.lo[k], self.hi[k]
            # the kink correction acts on the last axis, so keep it only if that axis stays last
            kink = self.center_kink and order[-1] == self.dim - 1
            return GridFunction(lo, hi, np.ascontiguousarray(vals), tail_mass=self.tail_mass, center_kink=kink)
        box = self.world_bbox()
        if box is None:
            box = (np.zeros(self.dim) - 1.0, np.zeros(self.dim) + 1.0)
        lo, hi = box
        pad = 0.05 * (hi - lo) + self.spacing
        return self.resampled(lo - pad, hi + pad, self.values.shape)

    # -- serialization --------------------------------------------------

    def to_bytes(self):
        g = self.axis_aligned()
        head = struct.pack("<q", g.dim)
        head += struct.pack(f"<{g.dim}d", *g.lo) + struct.pack(f"<{g.dim}d", *g.hi)
        head += struct.pack(f"<{g.dim}q", *g.values.shape)
        return head + np.ascontiguousarray(g.values, dtype="<f8").tobytes()

    @classmethod
    def from_bytes(cls, data):
        (dim,) = struct.unpack_from("<q", data, 0)
        off = 8
        lo = struct.unpack_from(f"<{dim}d", data, off)
        off += 8 * dim
        hi = struct.unpack_from(f"<{dim}d", data, off)
        off += 8 * dim
        res = struct.unpack_from(f"<{dim}q", data, off)
        off += 8 * dim
        values = np.frombuffer(data, dtype="<f8", offset=off, count=int(np.prod(res)))
        return cls(lo, hi, values.reshape(res).astype(float))

    def to_json(self):
        return {
            "dim": self.dim,
            "lo": self.lo.tolist(),
            "hi": self.hi.tolist(),
            "resolution": list(self.values.shape),
            "frame": self.frame.tolist(),
            "tail_mass": self.tail_mass,
            "center_kink": self.center_kink,
            "values": self.values.tolist(),
        }

    @classmethod
    def from_json(cls, obj):
        values = np.asarray(obj["values"], dtype=float)
        if "resolution" in obj:
            values = values.reshape(tuple(obj["resolution"]))
        return cls(
            obj["lo"], obj["hi"], values, frame=obj.get("frame"), tail_mass=obj.get("tail_mass", 0.0),
            center_kink=obj.get("center_kink", False),
        )

    def save(self, path):
        path = Path(path)
        if path.suffix == ".json":
            path.write_text(json.dumps(self.to_json()))
        else:
            path.write_bytes(self.to_bytes())
        return path

    @classmethod
    def load(cls, path):
        path = Path(path)
        if path.suffix == ".json":
            return cls.from_json(json.loads(path.read_text()))
        return cls.from_bytes(path.read_bytes())
