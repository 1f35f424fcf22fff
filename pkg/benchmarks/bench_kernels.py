"""Compare the numba and numpy elimination kernels.

Two workloads: random boundary-like matrices (entries in {0, +-1, +-2, +-4})
fed straight to the kernel, and full Bredon columns of C4 spheres, which is
what the oracle spends its time on.  The exact Python SNF is the reference
for the first workload.

    python benchmarks/bench_kernels.py [--reps 3] [--box 4]
"""

import argparse
import itertools
import time

import numpy as np

from eoperiod import _kernels, bredon
from eoperiod.groups import C4
from eoperiod.lattice import snf_diagonal


def random_matrices(n, size, seed=0):
    rng = np.random.default_rng(seed)
    vals = np.array([0, 0, 0, 0, 1, -1, 2, -2, 4, -4])
    return [rng.choice(vals, size=(size, size + 2)) for _ in range(n)]


def best_of(reps, fn):
    times = []
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_matrices(reps):
    print(f"{'size':>5} {'count':>6} {'exact s':>9} {'numpy s':>9} {'numba s':>9} {'speedup':>8}")
    for size, count in ((4, 2000), (8, 500), (16, 100)):
        mats = random_matrices(count, size)
        lists = [m.tolist() for m in mats]
        want = [snf_diagonal(m) for m in lists]
        for kern in ("numpy", "numba"):
            assert [_kernels.smith_diagonal(m, kern) for m in mats] == want, kern
        t_exact = best_of(1, lambda: [snf_diagonal(m) for m in lists])
        t_np = best_of(reps, lambda: [_kernels.smith_diagonal(m, "numpy") for m in mats])
        t_nb = best_of(reps, lambda: [_kernels.smith_diagonal(m, "numba") for m in mats])
        print(f"{size:>5} {count:>6} {t_exact:9.3f} {t_np:9.3f} {t_nb:9.3f} {t_np / t_nb:7.1f}x")


def bench_columns(box, reps):
    coeffs = list(itertools.product(range(-box, box + 1), repeat=3))

    def run(kern):
        import os
        os.environ["EOPERIOD_KERNEL"] = kern
        bredon.homology_column.cache_clear()
        bredon.sphere_complex.cache_clear()
        return [bredon.chart_column(bredon.sphere(C4, *c)) for c in coeffs]

    a, b = run("numpy"), run("numba")
    assert a == b
    t_np = best_of(reps, lambda: run("numpy"))
    t_nb = best_of(reps, lambda: run("numba"))
    print(f"C4 columns, {len(coeffs)} spheres: numpy {t_np:.2f} s, numba {t_nb:.2f} s, "
          f"speedup {t_np / t_nb:.1f}x")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--reps", type=int, default=3)
    ap.add_argument("--box", type=int, default=4)
    args = ap.parse_args()
    if _kernels.njit is None:
        print("numba is not installed; only the numpy kernel is available")
        return
    _kernels.smith_diagonal(np.eye(2, dtype=np.int64), "numba")  # compile outside the timings
    bench_matrices(args.reps)
    bench_columns(args.box, args.reps)


if __name__ == "__main__":
    main()
