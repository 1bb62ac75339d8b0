"""Time the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_backends.py [--points 200] [--repeat 3]

Both backends evaluate the exact curvature bundle at the same seeded sample
points for every catalog metric. The script also reports the largest
difference between the two bundles so a speedup never hides a wrong answer.
"""

from __future__ import annotations

import argparse
import time

from tpgr import _backend
from tpgr.catalog import get_metric
from tpgr.geometry import bundle_discrepancy, curvature_at
from tpgr.sampling import sample_points

METRICS = ("time-periodic", "time-periodic-tilde", "schwarzschild", "minkowski")


def run(spec, points):
    return [curvature_at(spec, None, p) for p in points]


def best_time(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=200)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args(argv)

    backends = _backend.available()
    if "cython" not in backends:
        print("compiled kernels are not built; only the fallback is timed")
    print(f"{'metric':<22}" + "".join(f"{b + ' [s]':>14}" for b in backends)
          + f"{'speedup':>10}{'max diff':>12}")
    prev = _backend.name()
    try:
        for name in METRICS:
            spec = get_metric(name)
            pts = sample_points(spec, None, args.points, seed=args.seed)
            times, bundles = {}, {}
            for b in backends:
                _backend.set_backend(b)
                times[b], bundles[b] = best_time(lambda: run(spec, pts), args.repeat)
            row = f"{name:<22}" + "".join(f"{times[b]:>14.4f}" for b in backends)
            if len(backends) == 2:
                diff = max(bundle_discrepancy(x, y) for x, y in zip(bundles["cython"], bundles["python"]))
                row += f"{times['python'] / times['cython']:>9.1f}x{diff:>12.1e}"
            print(row)
    finally:
        _backend.set_backend(prev)


if __name__ == "__main__":
    main()
