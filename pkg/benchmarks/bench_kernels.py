"""Compiled vs numpy kernels on the insulin closed loop.

    python3 benchmarks/bench_kernels.py [--states 2000] [--steps 400] [--repeat 3]

Prints wall time per backend and checks that both return identical results.
"""

import argparse
import time

import numpy as np

from conecert import kernels
from conecert.qclp import design_plant, insulin_plant


def best_of(fn, repeat):
    times = []
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--states", type=int, default=2000)
    ap.add_argument("--steps", type=int, default=400)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    sys_ = design_plant(insulin_plant()).closed_loop
    rng = np.random.default_rng(args.seed)
    X0 = rng.standard_normal((args.states, sys_.n))
    X0 /= np.linalg.norm(X0, axis=1, keepdims=True)
    a2 = sys_.A(2)
    r0 = sys_.K @ a2
    G = rng.standard_normal((sys_.n, sys_.n))

    backends = ["python"]
    try:
        kernels._pick("compiled")
        backends.append("compiled")
    except ImportError:
        print("compiled kernels not built; only the numpy backend is timed")

    results = {}
    print(f"{'kernel':<22}{'backend':<10}{'seconds':>10}")
    for b in backends:
        t, counts = best_of(lambda: kernels.batch_switch_counts(sys_.A(1), a2, sys_.K, X0, args.steps,
                                                                backend=b), args.repeat)
        print(f"{'batch_switch_counts':<22}{b:<10}{t:>10.4f}")
        t2, orbit = best_of(lambda: kernels.row_orbit_extrema(r0, a2, G, args.steps * 10, backend=b), args.repeat)
        print(f"{'row_orbit_extrema':<22}{b:<10}{t2:>10.4f}")
        results[b] = (t, t2, counts, orbit)

    if len(results) == 2:
        py, cc = results["python"], results["compiled"]
        same = np.array_equal(py[2], cc[2])
        dev = max(float(np.max(np.abs(py[3][k] - cc[3][k]) / np.maximum(np.abs(py[3][k]), 1e-300))) for k in (0, 1))
        print(f"switch counts identical: {same}")
        print(f"orbit extrema max relative deviation: {dev:.2e}")
        print(f"speedup: switch counts x{py[0] / cc[0]:.1f}, orbit x{py[1] / cc[1]:.1f}")


if __name__ == "__main__":
    main()
