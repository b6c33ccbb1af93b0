"""Command-line experiment runner.

``minorantlab <command> --config <file> [--N k] [--alpha a] [--seed s]
[--jobs j] [--out dir] [--plot] [--dump-minorant path]``

The config is one JSON object.  Its keys are the defaults of every
experiment; an optional ``"experiments"`` list holds per-experiment
overrides, and ``"functions"`` is a shorthand for one experiment per
function.  Flags override the config.  Each run writes ``<command>.csv`` and
``<command>.json`` into the output directory.

Exit status: 0 when every certificate holds, 2 on a violation, 1 on a usage
error (message on standard error).
"""

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import catalog
from .approx import (
    OptimizerConfig,
    best_minorant,
    macbeath_pair,
    random_admissible_points,
    steiner_monotonicity_check,
)
from .functional import INF, CatalogError, alpha_to_json, as_alpha
from .grid import GridFunction
from .measure import total_mass
from .plot import emit_plot
from .symmetry import (
    RESOLUTION,
    Hyperplane,
    l1_to,
    random_hyperplane_sequence,
    rearrange,
    steiner_symmetrize,
    support_extents,
)

COMMANDS = (
    "verify-theorem",
    "macbeath-pair",
    "steiner-chain",
    "minorant",
    "rearrange",
    "symmetrize",
    "recover-macbeath",
)
COLUMNS = (
    "experiment",
    "function_id",
    "alpha",
    "n",
    "N",
    "J_f",
    "J_fstar",
    "bestmass_f",
    "bestmass_fstar",
    "G_f",
    "G_fstar",
    "gap",
    "certificate_ok",
    "seed",
)
KEYS = {
    "command",
    "function",
    "functions",
    "experiments",
    "N",
    "Ns",
    "alpha",
    "seed",
    "restarts",
    "maxIterations",
    "simplexScale",
    "symmetricAnsatz",
    "hyperplane",
    "points",
    "configs",
    "steps",
    "resolution",
    "noise",
    "save",
    "plot",
}
NEEDS_N = {"verify-theorem", "minorant"}
CHAIN_NOISE = 1e-3


class UsageError(Exception):
    """Bad command line or config."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _parser():
    p = _Parser(prog="minorantlab", description="alpha-concave minorant experiments")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, help="JSON experiment file")
    p.add_argument("--N", type=int, help="break-point budget")
    p.add_argument("--alpha", help="override the concavity parameter (a number or 'inf')")
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int, default=1, help="parallel workers")
    p.add_argument("--out", default="results", help="output directory")
    p.add_argument("--plot", action="store_true", help="write SVG charts")
    p.add_argument("--dump-minorant", dest="dump_minorant", help="write the best minorant as JSON")
    return p


# --------------------------------------------------------------------------
# config handling


def _load_config(path):
    path = Path(path)
    try:
        obj = json.loads(path.read_text())
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise UsageError("the config must be a JSON object")
    return obj


def expand(config, command, overrides):
    """Validated list of experiment dictionaries, in config order."""
    unknown = set(config) - KEYS
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    defaults = {k: v for k, v in config.items() if k not in ("experiments", "functions")}
    if "experiments" in config:
        items = config["experiments"]
        if not isinstance(items, list) or not items:
            raise UsageError("'experiments' must be a nonempty list")
    elif "functions" in config:
        items = [{"function": fn} for fn in config["functions"]]
    else:
        items = [{}]
    out = []
    for k, item in enumerate(items):
        if not isinstance(item, dict):
            raise UsageError(f"experiment {k} is not an object")
        bad = set(item) - KEYS
        if bad:
            raise UsageError(f"experiment {k}: unknown keys {', '.join(sorted(bad))}")
        spec = dict(defaults)
        spec.update(item)
        spec.update({key: v for key, v in overrides.items() if v is not None})
        spec.setdefault("command", command)
        if spec["command"] != command:
            raise UsageError(f"experiment {k} is a {spec['command']!r} experiment, not {command!r}")
        _validate(spec, k)
        spec["index"] = k
        out.append(spec)
    return out


def _validate(spec, k):
    cmd = spec["command"]
    if "function" not in spec:
        raise UsageError(f"experiment {k}: missing 'function'")
    if cmd in NEEDS_N and "N" not in spec:
        raise UsageError(f"experiment {k}: {cmd} needs N")
    if cmd == "recover-macbeath" and "N" not in spec and "Ns" not in spec:
        raise UsageError(f"experiment {k}: recover-macbeath needs N or Ns")
    if cmd == "macbeath-pair" and "N" not in spec and "points" not in spec:
        raise UsageError(f"experiment {k}: macbeath-pair needs N or points")
    for key in ("N", "seed", "restarts", "maxIterations", "steps", "configs", "resolution"):
        if key in spec and (not isinstance(spec[key], int) or isinstance(spec[key], bool)):
            raise UsageError(f"experiment {k}: {key} must be an integer")
    if "N" in spec and spec["N"] < 1:
        raise UsageError(f"experiment {k}: N must be at least 1")
    if "alpha" in spec:
        try:
            as_alpha(spec["alpha"])
        except (ValueError, TypeError) as exc:
            raise UsageError(f"experiment {k}: {exc}") from None


def _description(ref, base_dir):
    if isinstance(ref, dict):
        return dict(ref)
    if isinstance(ref, str):
        if ref in catalog.BUILTIN:
            obj = dict(catalog.BUILTIN[ref])
            obj["id"] = ref
            return obj
        path = Path(ref)
        if base_dir is not None and not path.is_absolute():
            path = Path(base_dir) / path
        if path.suffix == ".json" and path.exists():
            obj = json.loads(path.read_text())
            if isinstance(obj, dict) and isinstance(obj.get("params"), dict) and "path" in obj["params"]:
                p = Path(obj["params"]["path"])
                if not p.is_absolute():
                    obj["params"] = dict(obj["params"], path=str(path.parent / p))
            obj.setdefault("id", path.stem)
            return obj
    raise CatalogError(f"unknown catalog id {ref!r}")


def load_spec_function(spec, base_dir=None):
    obj = _description(spec["function"], base_dir)
    if "alpha" in spec:
        obj["alpha"] = spec["alpha"]
    return catalog.function_from_json(obj, base_dir=base_dir)


def _cfg(spec, jobs=1, **extra):
    kw = {
        k: spec[k] for k in ("restarts", "maxIterations", "simplexScale", "seed", "symmetricAnsatz") if k in spec
    }
    kw.update(extra)
    kw["jobs"] = jobs
    return OptimizerConfig(**kw)


def _hyperplane(spec, n):
    if "hyperplane" in spec:
        return Hyperplane(spec["hyperplane"])
    return Hyperplane(np.eye(n)[0])


# --------------------------------------------------------------------------
# experiments


def _row(spec, f, **vals):
    row = dict.fromkeys(COLUMNS)
    row.update(
        experiment=spec["command"],
        function_id=f.name or "inline",
        alpha=f.alpha,
        n=f.dim,
        seed=spec.get("seed", 0),
    )
    row.update(vals)
    return row


def _verify_theorem(spec, f, jobs):
    N = spec["N"]
    fs = rearrange(f)
    Jf, Jfs = total_mass(f), total_mass(fs)
    sol_f = best_minorant(f, N, _cfg(spec, jobs))
    sol_s = best_minorant(fs, N, _cfg(spec, jobs, symmetricAnsatz=True))
    G_f = Jf.value - sol_f.mass.value
    G_s = Jfs.value - sol_s.mass.value
    gap = sol_f.optimizerGap + sol_s.optimizerGap + Jf.error_bound + Jfs.error_bound
    row = _row(
        spec, f, N=N, J_f=Jf.value, J_fstar=Jfs.value, bestmass_f=sol_f.mass.value,
        bestmass_fstar=sol_s.mass.value, G_f=G_f, G_fstar=G_s, gap=gap, certificate_ok=G_f <= G_s + gap,
    )
    detail = {"solution_f": sol_f.to_json(), "solution_fstar": sol_s.to_json()}
    return [row], detail, {}, sol_f.minorant


def _macbeath(spec, f, jobs):
    H = _hyperplane(spec, f.dim)
    J = total_mass(f)
    rows, pairs = [], []
    if "points" in spec:
        configs = [[(np.asarray(p[:-1], float), float(p[-1])) for p in spec["points"]]]
    elif "configs" in spec:
        rng = np.random.default_rng(spec.get("seed", 0))
        configs = [random_admissible_points(f, H, spec["N"], rng) for _ in range(spec["configs"])]
    else:
        configs = None
    if configs is None:
        # lift the best minorant of the symmetral
        res = steiner_monotonicity_check(f, H, spec["N"], _cfg(spec, jobs), resolution=spec.get("resolution"))
        pair = res["pair"]
        rows.append(
            _row(
                spec, f, N=spec["N"], J_f=J.value, J_fstar=J.value, bestmass_f=res["bestmass_f"],
                bestmass_fstar=res["J_p"], G_f=J.value - res["bestmass_f"], G_fstar=J.value - res["J_p"],
                gap=res["bound"] + res["gap"], certificate_ok=res["certificate_ok"],
            )
        )
        pairs.append(pair)
        minorant = res["solution_f"].minorant
    else:
        for pts in configs:
            pair = macbeath_pair(f, H, pts)
            best = max(pair.mass_q.value, pair.mass_r.value)
            ok = pair.holds(1e-9) and best >= pair.mass_p.value - pair.bound - 1e-9
            rows.append(
                _row(
                    spec, f, N=len(pts), J_f=J.value, J_fstar=J.value, bestmass_f=best,
                    bestmass_fstar=pair.mass_p.value, G_f=J.value - best, G_fstar=J.value - pair.mass_p.value,
                    gap=pair.bound, certificate_ok=ok,
                )
            )
            pairs.append(pair)
        minorant = None
    detail = {
        "hyperplane": H.to_json(),
        "pairs": [
            {"J_p": p.mass_p.value, "J_q": p.mass_q.value, "J_r": p.mass_r.value, "slack": p.slack, "bound": p.bound}
            for p in pairs
        ],
    }
    return rows, detail, {}, minorant


def _steiner_chain(spec, f, jobs):
    steps = spec.get("steps", 200)
    seed = spec.get("seed", 0)
    res = spec.get("resolution", RESOLUTION)
    target = rearrange(f)
    J = total_mass(f)
    Jt = total_mass(target)
    g = f
    dist = []
    for H in random_hyperplane_sequence(seed, f.dim, steps):
        g = steiner_symmetrize(g, H, resolution=res)
        dist.append(l1_to(g, target))
    noise = spec.get("noise", CHAIN_NOISE) * J.value
    rise = max([b - a for a, b in zip(dist, dist[1:])] + [0.0])
    final_rel = dist[-1] / J.value
    row = _row(
        spec, f, J_f=J.value, J_fstar=Jt.value, gap=rise, certificate_ok=rise <= noise,
    )
    detail = {
        "steps": steps,
        "l1": dist,
        "final_relative": final_rel,
        "below_one_percent": final_rel < 0.01,
        "largest_increase": rise,
        "noise_allowance": noise,
    }
    series = {"L1 distance to f*": list(enumerate(dist, start=1))}
    return [row], detail, {"series": series, "xlabel": "step", "ylabel": "L1 distance", "logy": True}, None


def _minorant(spec, f, jobs):
    N = spec["N"]
    J = total_mass(f)
    sol = best_minorant(f, N, _cfg(spec, jobs))
    ok = sol.mass.value <= J.value + J.error_bound + sol.mass.error_bound
    row = _row(
        spec, f, N=N, J_f=J.value, bestmass_f=sol.mass.value, G_f=J.value - sol.mass.value,
        gap=sol.optimizerGap + J.error_bound, certificate_ok=ok,
    )
    return [row], {"solution": sol.to_json()}, {}, sol.minorant


def _sample_grid(f, resolution):
    eye = np.eye(f.dim)
    ext, tail = support_extents(f, [eye[k] for k in range(f.dim)])
    r = max(max(abs(a), abs(b)) for a, b in ext)
    lo, hi = -np.full(f.dim, r), np.full(f.dim, r)
    axes = [np.linspace(-r, r, resolution)] * f.dim
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.reshape(-1) for m in mesh], axis=1)
    vals = np.asarray(f(pts), dtype=float).reshape((resolution,) * f.dim)
    return GridFunction(lo, hi, vals, tail_mass=tail)


def _save_name(spec, f, suffix):
    return spec.get("save") or f"{f.name or 'inline'}_{suffix}.grid"


def _rearrange(spec, f, jobs):
    fs = rearrange(f)
    J, Js = total_mass(f), total_mass(fs)
    gap = J.error_bound + Js.error_bound
    row = _row(spec, f, J_f=J.value, J_fstar=Js.value, gap=gap, certificate_ok=abs(Js.value - J.value) <= gap)
    grid = _sample_grid(fs, spec.get("resolution", RESOLUTION))
    return [row], {"mass_method": Js.method}, {"grid": (grid, _save_name(spec, f, "rearranged"))}, None


def _symmetrize(spec, f, jobs):
    H = _hyperplane(spec, f.dim)
    g = steiner_symmetrize(f, H, resolution=spec.get("resolution", RESOLUTION))
    J, Jg = total_mass(f), total_mass(g)
    gap = J.error_bound + Jg.error_bound
    row = _row(spec, f, J_f=J.value, J_fstar=Jg.value, gap=gap, certificate_ok=abs(Jg.value - J.value) <= gap)
    detail = {"hyperplane": H.to_json()}
    return [row], detail, {"grid": (g.base.grid, _save_name(spec, f, "symmetral"))}, None


def _polygon_defect(area, N):
    """Area of a disk minus its inscribed regular N-gon."""
    return area * (1.0 - N * math.sin(2 * math.pi / N) / (2 * math.pi))


def _recover_macbeath(spec, f, jobs):
    Ns = spec.get("Ns") or [spec["N"]]
    fs = rearrange(f)
    J, Js = total_mass(f), total_mass(fs)
    rows, details, gf, gs = [], [], [], []
    for N in Ns:
        sol_f = best_minorant(f, N, _cfg(spec, jobs, symmetricAnsatz=True))
        sol_s = best_minorant(fs, N, _cfg(spec, jobs, symmetricAnsatz=True))
        G_f = J.value - sol_f.mass.value
        G_s = Js.value - sol_s.mass.value
        gap = sol_f.optimizerGap + sol_s.optimizerGap + J.error_bound + Js.error_bound
        rows.append(
            _row(
                spec, f, N=N, J_f=J.value, J_fstar=Js.value, bestmass_f=sol_f.mass.value,
                bestmass_fstar=sol_s.mass.value, G_f=G_f, G_fstar=G_s, gap=gap, certificate_ok=G_f <= G_s + gap,
            )
        )
        entry = {"N": N}
        if f.alpha == INF and f.dim == 2:
            entry["G_fstar_polygon_oracle"] = _polygon_defect(Js.value / fs.height, N) * fs.height
        details.append(entry)
        gf.append((N, G_f))
        gs.append((N, G_s))
    series = {"G(f)": gf, "G(f*)": gs}
    return rows, {"per_N": details}, {"series": series, "xlabel": "N", "ylabel": "G"}, None


RUNNERS = {
    "verify-theorem": _verify_theorem,
    "macbeath-pair": _macbeath,
    "steiner-chain": _steiner_chain,
    "minorant": _minorant,
    "rearrange": _rearrange,
    "symmetrize": _symmetrize,
    "recover-macbeath": _recover_macbeath,
}


def run_experiment(spec, base_dir=None, jobs=1):
    """Run one validated experiment; returns ``(rows, detail, artifacts, minorant)``."""
    f = load_spec_function(spec, base_dir)
    return RUNNERS[spec["command"]](spec, f, jobs)


def _run_indexed(args):
    spec, base_dir = args
    return run_experiment(spec, base_dir)


# --------------------------------------------------------------------------
# output


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        if v == INF:
            return "inf"
        return "%.17g" % float(v)
    return str(v)


def format_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for row in rows:
        w.writerow([_cell(row[c]) for c in COLUMNS])
    return buf.getvalue()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return None if math.isnan(v) else v
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def _public_spec(spec):
    out = {k: v for k, v in spec.items() if k != "index"}
    if "alpha" in out:
        out["alpha"] = alpha_to_json(as_alpha(out["alpha"]))
    return out


def main(argv=None):
    try:
        return _main(argv)
    except UsageError as exc:
        print(f"minorantlab: error: {exc}", file=sys.stderr)
        return 1


def _main(argv):
    args = _parser().parse_args(argv)
    if args.jobs < 1:
        raise UsageError("--jobs must be at least 1")
    config = _load_config(args.config)
    base_dir = str(Path(args.config).resolve().parent)
    overrides = {"N": args.N, "alpha": args.alpha, "seed": args.seed}
    specs = expand(config, args.command, overrides)
    # catch bad function references before any work starts
    for spec in specs:
        try:
            load_spec_function(spec, base_dir)
        except (CatalogError, ValueError, OSError) as exc:
            raise UsageError(f"experiment {spec['index']}: {exc}") from None
    plot = args.plot or bool(config.get("plot"))
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    if args.jobs > 1 and len(specs) > 1:
        with ProcessPoolExecutor(max_workers=min(args.jobs, len(specs))) as pool:
            results = list(pool.map(_run_indexed, [(s, base_dir) for s in specs]))
    else:
        results = [run_experiment(s, base_dir, jobs=args.jobs) for s in specs]

    rows, log = [], []
    for spec, (rs, detail, artifacts, minorant) in zip(specs, results):
        rows.extend(rs)
        entry = {"spec": _public_spec(spec), "rows": [{c: r[c] for c in COLUMNS} for r in rs], "detail": detail}
        suffix = f"_{spec['index']}" if len(specs) > 1 else ""
        if "grid" in artifacts:
            grid, name = artifacts["grid"]
            path = out_dir / name
            grid.save(path)
            entry["grid"] = str(path)
        if plot and "series" in artifacts:
            path = out_dir / f"{args.command}{suffix}.svg"
            emit_plot(
                artifacts["series"], path, title=f"{args.command}: {rs[0]['function_id']}",
                xlabel=artifacts.get("xlabel", ""), ylabel=artifacts.get("ylabel", ""),
                logy=artifacts.get("logy", False),
            )
            entry["plot"] = str(path)
        if args.dump_minorant and minorant is not None:
            path = Path(args.dump_minorant)
            if suffix:
                path = path.with_name(f"{path.stem}{suffix}{path.suffix}")
            minorant.dump(path)
            entry["minorant"] = str(path)
        log.append(entry)

    if plot and not any("plot" in e for e in log) and rows:
        # commands without a natural series: G on f against G on the reference side
        pts = [(k, r["G_f"]) for k, r in enumerate(rows) if r["G_f"] is not None]
        pts_s = [(k, r["G_fstar"]) for k, r in enumerate(rows) if r["G_fstar"] is not None]
        series = {k: v for k, v in (("G(f)", pts), ("G(f*)", pts_s)) if v}
        if series:
            emit_plot(series, out_dir / f"{args.command}.svg", title=args.command, xlabel="row", ylabel="G")

    ok = all(bool(r["certificate_ok"]) for r in rows)
    (out_dir / f"{args.command}.csv").write_text(format_csv(rows))
    doc = {
        "command": args.command,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "config": str(Path(args.config).resolve()),
        "all_certificates_ok": ok,
        "experiments": log,
    }
    (out_dir / f"{args.command}.json").write_text(json.dumps(_jsonable(doc), indent=1) + "\n")
    for r in rows:
        if not r["certificate_ok"]:
            print(
                f"certificate violated: {r['experiment']} {r['function_id']} N={_cell(r['N'])}",
                file=sys.stderr,
            )
    return 0 if ok else 2


if __name__ == "__main__":
    sys.exit(main())
