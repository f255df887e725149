"""Time the numba and numpy SMO backends on the same dual problems.

    python3 benchmarks/bench_smo.py [--sizes 200 500 1000] [--repeats 3]

Both backends must return identical multipliers; the script checks this
before reporting timings.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from pave_iri import _accel
from pave_iri.classifiers.kernels import KernelKind, KernelSpec, gram_symmetric
from pave_iri.classifiers.smo import solve_dual


def problem(n: int, p: int, seed: int):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, p))
    y = np.where(X[:, 0] + 0.5 * rng.normal(size=n) > 0, 1.0, -1.0)
    K = gram_symmetric(X, KernelSpec(KernelKind.RBF, gamma=1.0 / p))
    return K, y


def best_of(fn, repeats: int) -> float:
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[200, 500, 1000])
    ap.add_argument("--features", type=int, default=20)
    ap.add_argument("--C", type=float, default=1.0)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args(argv)

    if not _accel.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")
    K, y = problem(10, args.features, 0)
    solve_dual(K, y, args.C, use_jit=True)  # compile outside the timed region

    print(f"{'n':>6} {'iters':>7} {'numba_s':>9} {'numpy_s':>9} {'speedup':>8}")
    for n in args.sizes:
        K, y = problem(n, args.features, n)
        a = solve_dual(K, y, args.C, use_jit=True)
        b = solve_dual(K, y, args.C, use_jit=False)
        if not np.array_equal(a.alpha, b.alpha):
            raise SystemExit(f"backends disagree at n={n}")
        t_jit = best_of(lambda: solve_dual(K, y, args.C, use_jit=True), args.repeats)
        t_np = best_of(lambda: solve_dual(K, y, args.C, use_jit=False), args.repeats)
        print(f"{n:>6} {a.n_iter:>7} {t_jit:>9.4f} {t_np:>9.4f} {t_np / t_jit:>7.1f}x")


if __name__ == "__main__":
    main()
