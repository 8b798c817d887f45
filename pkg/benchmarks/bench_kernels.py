#!/usr/bin/env python3
"""Compare the compiled orbit kernels against the numpy fallback.

    python benchmarks/bench_kernels.py --resolution 256 --repeat 3

Both backends classify the same raster; the script reports wall time per
backend, the speed-up and the fraction of cells on which they agree.
"""
import argparse
import sys
import time

import numpy as np

from qrdyn._backend import get_kernels
from qrdyn.dynamics import Slice


def run(backend, points, d, group, max_iter, repeat):
    k = get_kernels(backend)
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        cls, its = k.classify_power(points, d, group, max_iter, 1e-6, 1e6)
        best = min(best, time.perf_counter() - t0)
    return best, np.asarray(cls), np.asarray(its)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--resolution", type=int, default=256)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--d", type=int, default=2)
    ap.add_argument("--dim", type=int, default=3, choices=[2, 3])
    ap.add_argument("--max-iter", type=int, default=200)
    args = ap.parse_args(argv)

    group = "p2" if args.dim == 3 else "zorich2"
    pts = Slice.plane(args.dim, "xy").centers(args.resolution).reshape(-1, args.dim)
    print(f"{len(pts)} points, power map d={args.d} in dimension {args.dim}, best of {args.repeat}")
    results = {}
    for name in ("python", "cython"):
        try:
            results[name] = run(name, pts, args.d, group, args.max_iter, args.repeat)
        except ImportError:
            print(f"{name:>7}: not available (extension not built)")
            continue
        t, cls, _ = results[name]
        print(f"{name:>7}: {t:8.3f} s  ({len(pts) / t / 1e3:8.1f} k points/s)")
    if len(results) == 2:
        tp, cp, ip = results["python"]
        tc, cc, ic = results["cython"]
        print(f"speed-up: {tp / tc:.1f}x")
        print(f"class agreement: {np.mean(cp == cc) * 100:.3f}%  "
              f"iteration-count agreement: {np.mean(ip == ic) * 100:.3f}%")
    return 0


if __name__ == "__main__":
    sys.exit(main())
