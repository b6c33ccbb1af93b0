"""Backend selection for the hot kernels.

The compiled ``_ckernels`` extension is used when it was built; otherwise the
pure-Python ``_pykernels`` module.  Both expose the same functions.
"""

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    BACKENDS["cython"] = _ckernels

_active = _ckernels if _ckernels is not None else _pykernels
BACKEND = "cython" if _ckernels is not None else "python"


def use_backend(name):
    """Switch the active backend (``"cython"`` or ``"python"``)."""
    global _active, BACKEND
    if name not in BACKENDS:
        raise ValueError(f"backend {name!r} is not available; have {sorted(BACKENDS)}")
    _active = BACKENDS[name]
    BACKEND = name


def dedupe(x, t):
    return _active.dedupe(x, t)


def lower_hull_1d(x, t):
    return _active.lower_hull_1d(x, t)


def lower_faces_2d(p, t):
    return _active.lower_faces_2d(p, t)


def mass_1d(x, t, alpha):
    return _active.mass_1d(x, t, alpha)


def mass_2d(p, t, alpha):
    return _active.mass_2d(p, t, alpha)


def minorant_mass(x, t, alpha):
    """Exact mass of the alpha-affine minorant spanned by lifted points ``(x_i, t_i)``."""
    if x.ndim == 1 or x.shape[1] == 1:
        return _active.mass_1d(x, t, alpha)
    return _active.mass_2d(x, t, alpha)
