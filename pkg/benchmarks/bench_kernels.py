"""Compare the numba and numpy paths of the hot kernels.

    python benchmarks/bench_kernels.py [--points 2000] [--repeat 5]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from dami import _kernels
from dami.core import KernelSpec
from dami.oracle import _prepare


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--points", type=int, default=2000, help="points for the moment benchmark")
    ap.add_argument("--tuple-points", type=int, default=20, help="points for the tuple-sum benchmark")
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    if not _kernels.NUMBA_AVAILABLE:
        raise SystemExit("numba is not installed; nothing to compare")

    rng = np.random.default_rng(args.seed)
    data = rng.normal(size=(args.points, 6))
    w = rng.uniform(0.5, 1.5, args.points)
    exps = rng.integers(0, 5, (300, 6))

    spec = KernelSpec.parse("S(1,2,3)*S(1,2,4)*C(1,3,4)*C(2,3,4)")
    kinds, pts, pexps = _prepare(spec)
    n = args.tuple_points
    space, chan, tw = rng.normal(size=(n, 3)), rng.uniform(size=(n, 3)), np.ones(n)

    cases = [
        (f"moment_sums ({args.points} pts x {len(exps)} keys)",
         lambda: _kernels.moment_sums_numpy(data, w, exps),
         lambda: _kernels.moment_sums_numba(data, w, exps)),
        (f"tuple_sum ({n}^{spec.degree} tuples)",
         lambda: _kernels.tuple_sum_numpy(space, chan, tw, kinds, pts, pexps, spec.degree),
         lambda: _kernels.tuple_sum_numba(space, chan, tw, kinds, pts, pexps, spec.degree)),
    ]
    print(f"{'kernel':<40} {'numpy s':>10} {'numba s':>10} {'speedup':>8} {'max rel diff':>13}")
    for name, np_fn, nb_fn in cases:
        nb_fn()  # compile
        t_np, a = best_of(np_fn, args.repeat)
        t_nb, b = best_of(nb_fn, args.repeat)
        a, b = np.atleast_1d(np.asarray(a, float)), np.atleast_1d(np.asarray(b, float))
        diff = float(np.max(np.abs(a - b) / np.maximum(np.abs(a), 1e-300)))
        print(f"{name:<40} {t_np:>10.4f} {t_nb:>10.4f} {t_np / t_nb:>7.1f}x {diff:>13.1e}")


if __name__ == "__main__":
    main()
