"""Compiled vs pure-Python kernels.

Times the hot kernels on random lifted point sets, plus one end-to-end
minorant search, under each available backend.

    python benchmarks/bench_kernels.py [--repeat 5] [--json out.json]
"""

import argparse
import json
import timeit

import numpy as np

from minorantlab import catalog, kernels
from minorantlab.approx import OptimizerConfig, best_minorant


def _inputs(seed, dim, k, count):
    rng = np.random.default_rng(seed)
    return [(rng.uniform(-1, 1, (k, dim)), rng.uniform(0, 2, k)) for _ in range(count)]


def cases():
    one = _inputs(1, 1, 8, 200)
    two = _inputs(2, 2, 8, 200)
    big = _inputs(3, 2, 24, 40)
    return {
        "mass_1d (k=8, x200)": lambda: [kernels.mass_1d(x[:, 0], t, 0.0) for x, t in one],
        "mass_2d alpha=0 (k=8, x200)": lambda: [kernels.mass_2d(x, t, 0.0) for x, t in two],
        "mass_2d alpha=1 (k=8, x200)": lambda: [kernels.mass_2d(x, np.minimum(t, 1.0), 1.0) for x, t in two],
        "lower_faces_2d (k=24, x40)": lambda: [kernels.lower_faces_2d(*kernels.dedupe(x, t)) for x, t in big],
        "best_minorant gauss2 N=5": lambda: best_minorant(
            catalog.get("gauss2"), 5, OptimizerConfig(restarts=4, maxIterations=200)
        ),
    }


def run(repeat):
    start = kernels.BACKEND
    table = {}
    try:
        for backend in sorted(kernels.BACKENDS):
            kernels.use_backend(backend)
            for name, fn in cases().items():
                fn()  # warm-up
                best = min(timeit.repeat(fn, number=1, repeat=repeat))
                table.setdefault(name, {})[backend] = best
    finally:
        kernels.use_backend(start)
    return table


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", help="also write the timings here")
    args = ap.parse_args()
    table = run(args.repeat)
    backends = sorted(kernels.BACKENDS)
    print(f"{'case':34s}" + "".join(f"{b:>12s}" for b in backends) + ("     speedup" if len(backends) > 1 else ""))
    for name, row in table.items():
        line = f"{name:34s}" + "".join(f"{row[b] * 1e3:10.2f}ms" for b in backends)
        if "cython" in row:
            line += f"{row['python'] / row['cython']:11.1f}x"
        print(line)
    if len(backends) == 1:
        print("compiled extension not built; only the Python backend was timed")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(table, fh, indent=1)


if __name__ == "__main__":
    main()
