"""Named test functions and JSON ingestion of function descriptions.

A description is ``{"alpha": number | "inf", "kind": ..., "params": {...},
"dim": 1 | 2}`` with optional ``"height"`` (alpha = +inf only) and ``"id"``.
Kinds and their parameters:

``quadratic``            ``Q`` (n x n, positive definite), ``center``
``cone``                 ``normals`` (rows a_j), ``apex``, ``domain`` (rows d_k), or ``slopes`` in 1D
``indicator_polytope``   ``vertices``
``indicator_ellipsoid``  ``Q``, ``center``
``piecewise_affine``     ``points``: rows ``[x..., t]`` lifted above the graph
``grid``                 a serialized grid (``lo``, ``hi``, ``values``, ...) or ``path``
"""

import json
import math
from pathlib import Path

import numpy as np

from .functional import (
    INF,
    AlphaConcaveFunction,
    CatalogError,
    Cone,
    GridBacked,
    IndicatorOfEllipsoid,
    IndicatorOfPolytope,
    PiecewiseAffine,
    Quadratic,
    alpha_to_json,
    as_alpha,
    function_of_base,
)
from .grid import GridFunction

KINDS = ("quadratic", "cone", "indicator_polytope", "indicator_ellipsoid", "piecewise_affine", "grid")


def _base_from(kind, params, dim, base_dir=None):
    if kind == "quadratic":
        return Quadratic(params.get("Q", np.eye(dim).tolist()), params.get("center"))
    if kind == "cone":
        return Cone(
            normals=params.get("normals"),
            apex=params.get("apex"),
            domain=params.get("domain"),
            slopes=params.get("slopes"),
        )
    if kind == "indicator_polytope":
        return IndicatorOfPolytope(params["vertices"])
    if kind == "indicator_ellipsoid":
        return IndicatorOfEllipsoid(params.get("Q", np.eye(dim).tolist()), params.get("center"))
    if kind == "piecewise_affine":
        from .hull import inner_linearization

        rows = np.asarray(params["points"], dtype=float)
        return PiecewiseAffine(inner_linearization((rows[:, :-1], rows[:, -1]), allow_degenerate=False))
    raise CatalogError(f"unknown kind {kind!r}; expected one of {', '.join(KINDS)}")


def function_from_json(obj, base_dir=None):
    """Build an AlphaConcaveFunction from a description dictionary."""
    if not isinstance(obj, dict):
        raise CatalogError("a function description must be a JSON object")
    for key in ("alpha", "kind"):
        if key not in obj:
            raise CatalogError(f"function description is missing {key!r}")
    try:
        alpha = as_alpha(obj["alpha"])
    except ValueError as exc:
        raise CatalogError(str(exc)) from None
    kind = obj["kind"]
    params = obj.get("params", {})
    name = obj.get("id")
    if kind == "grid":
        if "path" in params:
            path = Path(params["path"])
            if base_dir is not None and not path.is_absolute():
                path = Path(base_dir) / path
            grid = GridFunction.load(path)
        else:
            grid = GridFunction.from_json(params)
        f = AlphaConcaveFunction(alpha, GridBacked(grid, alpha), name=name)
        if not f.contains_origin():
            raise CatalogError("the origin must lie in the support")
        return f
    dim = int(obj.get("dim", 0)) or None
    try:
        base = _base_from(kind, params, dim or 1)
    except (KeyError, TypeError) as exc:
        raise CatalogError(f"bad parameters for {kind!r}: {exc}") from None
    if dim is not None and base.dim != dim:
        raise CatalogError(f"parameters describe dimension {base.dim}, not {dim}")
    return function_of_base(alpha, base, height=float(obj.get("height", 1.0)), name=name)


def function_to_json(f):
    out = {"alpha": alpha_to_json(f.alpha), "dim": f.dim}
    out.update(f.base.to_json())
    if f.alpha == INF:
        out["height"] = f.height
    if f.name:
        out["id"] = f.name
    return out


def load_function(path):
    path = Path(path)
    return function_from_json(json.loads(path.read_text()), base_dir=path.parent)


# --------------------------------------------------------------------------
# built-in catalog

_SQRT_PI = math.sqrt(math.pi)

BUILTIN = {
    # dimension 1
    "gauss": {"alpha": 0, "kind": "quadratic", "params": {"Q": [[1.0]]}},
    "shifted_gauss": {"alpha": 0, "kind": "quadratic", "params": {"Q": [[1.0]], "center": [0.7]}},
    "laplace": {"alpha": 0, "kind": "cone", "params": {"slopes": [1.0, 1.0]}},
    "one_sided_exp": {"alpha": 0, "kind": "cone", "params": {"normals": [[1.0]], "domain": [[-1.0]]}},
    "asym_cone": {"alpha": 0, "kind": "cone", "params": {"slopes": [1.0, 3.0]}},
    "tent": {"alpha": 1, "kind": "cone", "params": {"slopes": [1.0, 1.0]}},
    "skew_tent": {"alpha": 1, "kind": "cone", "params": {"slopes": [1.0, 2.5]}},
    "parabola": {"alpha": 1, "kind": "quadratic", "params": {"Q": [[1.0]]}},
    "interval": {"alpha": "inf", "kind": "indicator_polytope", "params": {"vertices": [[-1.0], [2.0]]}},
    "cauchy": {"alpha": -1, "kind": "quadratic", "params": {"Q": [[1.0]]}},
    "student": {"alpha": -0.5, "kind": "quadratic", "params": {"Q": [[1.0]], "center": [0.3]}},
    # dimension 2
    "gauss2": {"alpha": 0, "kind": "quadratic", "params": {"Q": [[1.0, 0.0], [0.0, 1.0]]}},
    "sheared_gauss2": {"alpha": 0, "kind": "quadratic", "params": {"Q": [[1.0, 0.8], [0.8, 1.5]]}},
    "shifted_gauss2": {
        "alpha": 0,
        "kind": "quadratic",
        "params": {"Q": [[1.0, 0.3], [0.3, 3.0]], "center": [0.5, -0.3]},
    },
    "asym_cone2": {
        "alpha": 0,
        "kind": "cone",
        "params": {"normals": [[1.0, 0.5], [-1.0, 1.0], [0.0, -2.0]], "apex": [0.1, 0.1]},
    },
    "tent2": {
        "alpha": 1,
        "kind": "cone",
        "params": {"normals": [[1.0, 0.0], [-0.5, 1.0], [-0.5, -1.5]]},
    },
    "parabola2": {"alpha": 1, "kind": "quadratic", "params": {"Q": [[1.0, 0.2], [0.2, 2.0]]}},
    "student2": {"alpha": -0.5, "kind": "quadratic", "params": {"Q": [[1.0, 0.0], [0.0, 2.0]]}},
    "skew_triangle": {
        "alpha": "inf",
        "kind": "indicator_polytope",
        "params": {"vertices": [[-1.0, -0.5], [1.5, -0.3], [0.0, 1.0]]},
    },
    "square": {
        "alpha": "inf",
        "kind": "indicator_polytope",
        "params": {"vertices": [[-0.5, -0.5], [0.5, -0.5], [0.5, 0.5], [-0.5, 0.5]]},
    },
    "square_pi": {
        "alpha": "inf",
        "kind": "indicator_polytope",
        "params": {
            "vertices": [
                [-_SQRT_PI / 2, -_SQRT_PI / 2],
                [_SQRT_PI / 2, -_SQRT_PI / 2],
                [_SQRT_PI / 2, _SQRT_PI / 2],
                [-_SQRT_PI / 2, _SQRT_PI / 2],
            ]
        },
    },
    "unit_disk": {"alpha": "inf", "kind": "indicator_ellipsoid", "params": {"Q": [[1.0, 0.0], [0.0, 1.0]]}},
}

# the asymmetric functions used for theorem checks
ASYMMETRIC = ("shifted_gauss2", "sheared_gauss2", "one_sided_exp", "asym_cone2", "skew_triangle", "skew_tent")


def builtin_names(dim=None):
    names = sorted(BUILTIN)
    if dim is None:
        return names
    return [k for k in names if get(k).dim == dim]


def get(name):
    """Built-in function by name."""
    if name not in BUILTIN:
        raise CatalogError(f"unknown catalog id {name!r}")
    obj = dict(BUILTIN[name])
    obj["id"] = name
    return function_from_json(obj)


def resolve(ref, base_dir=None):
    """A catalog id, an inline description, or a path to a description file."""
    if isinstance(ref, dict):
        return function_from_json(ref, base_dir=base_dir)
    if isinstance(ref, str):
        if ref in BUILTIN:
            return get(ref)
        path = Path(ref)
        if base_dir is not None and not path.is_absolute():
            path = Path(base_dir) / path
        if path.suffix == ".json" and path.exists():
            return load_function(path)
    raise CatalogError(f"unknown catalog id {ref!r}")
