"""Compare the compiled kernels with the numpy fallback.

Run with ``python3 benchmarks/bench_kernels.py [--repeat N]``.  Every kernel is
first checked for agreement between backends, then timed on identical input.
"""

from __future__ import annotations

import argparse
import json
import timeit

import numpy as np

from desitter_lab import clifford, kernels


def _inputs(n: int, seed: int = 0) -> dict:
    rng = np.random.default_rng(seed)
    signs, target = clifford._product_tables(4, (1, -1, -1, -1), "geometric")
    g = np.broadcast_to(np.diag([1.0, -1.0, -1.0, -1.0]), (n, 4, 4)) + 0.05 * rng.normal(size=(n, 4, 4))
    g = 0.5 * (g + np.swapaxes(g, 1, 2))
    dg = rng.normal(size=(n, 4, 4, 4))
    dg = 0.5 * (dg + np.swapaxes(dg, 2, 3))  # derivatives of a symmetric metric
    return {
        "blade_products": (rng.normal(size=(n, 16)), rng.normal(size=(n, 16)), signs, target),
        "christoffel": (np.linalg.inv(g), dg),
        "geodesic_accel": (rng.normal(size=(n, 4, 4, 4)), rng.normal(size=(n, 4))),
    }


def _prepare(args):
    out = []
    for a in args:
        out.append(np.ascontiguousarray(a, dtype=np.int64 if a.dtype.kind in "iu" else np.float64))
    return out


def run(n: int = 4096, repeat: int = 5) -> dict:
    impls = kernels.backends()
    results = {"n": n, "backends": sorted(impls), "kernels": {}}
    for name, args in _inputs(n).items():
        args = _prepare(args)
        ref = getattr(impls["python"], name)(*args)
        row = {}
        for backend, mod in impls.items():
            fn = getattr(mod, name)
            gap = float(np.max(np.abs(np.asarray(fn(*args)) - ref)))
            best = min(timeit.repeat(lambda: fn(*args), number=3, repeat=repeat)) / 3
            row[backend] = {"seconds": best, "max_gap_vs_python": gap}
        if "compiled" in row:
            row["speedup"] = row["python"]["seconds"] / row["compiled"]["seconds"]
        results["kernels"][name] = row
    return results


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=4096, help="batch size")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    print(json.dumps(run(args.n, args.repeat), indent=2))


if __name__ == "__main__":
    main()
