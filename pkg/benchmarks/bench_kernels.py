#!/usr/bin/env python3
"""Benchmark the compiled scan kernels against the numpy fallback.

Run as ``python benchmarks/bench_kernels.py``.  The numbers motivate the
per-kernel backend choice in ``levysplit.kernels``: the fused C scans win
on long grids, while the permutation block sums are fastest through BLAS.
"""

import time

import numpy as np
from scipy.spatial.distance import cdist

from levysplit import _kernels_py as kpy
from levysplit import LevySpec, RngStream, sample_path, split_at_max_norm

try:
    from levysplit import _kernels_c as kc
except ImportError:
    kc = None


def timeit(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def row(name, py_fn, c_fn, repeat):
    t_py = timeit(py_fn, repeat)
    if c_fn is None:
        print(f"{name:<42} numpy {t_py * 1e3:9.2f} ms   C     (not built)")
        return
    t_c = timeit(c_fn, repeat)
    win = "C" if t_c < t_py else "numpy"
    ratio = max(t_py, t_c) / min(t_py, t_c)
    print(f"{name:<42} numpy {t_py * 1e3:9.2f} ms   C {t_c * 1e3:9.2f} ms   {win} wins {ratio:4.1f}x")


def main():
    rng = np.random.default_rng(0)

    n, d = 100_000, 2
    inc = rng.standard_normal((n, d))
    z = rng.standard_normal(n)
    v = rng.standard_normal((n, d))
    row(
        f"conditioned_pair_scan ({n}x{d})",
        lambda: kpy.conditioned_pair_scan(inc, z),
        (lambda: kc.conditioned_pair_scan(inc, z)) if kc else None,
        10,
    )
    row(
        f"argmin_last ({n})",
        lambda: kpy.argmin_last(z),
        (lambda: kc.argmin_last(z)) if kc else None,
        30,
    )
    row(
        f"argmax_norm_last ({n}x{d})",
        lambda: kpy.argmax_norm_last(v),
        (lambda: kc.argmax_norm_last(v)) if kc else None,
        30,
    )

    for pooled, n_perm in [(1000, 500), (4000, 500)]:
        pts = rng.standard_normal((pooled, 2))
        dist = cdist(pts, pts)
        labels = np.zeros((n_perm, pooled), dtype=bool)
        for p in range(n_perm):
            labels[p, rng.permutation(pooled)[: pooled // 2]] = True
        row(
            f"perm_block_sums (N={pooled}, {n_perm} perms)",
            lambda: kpy.perm_block_sums(dist, labels),
            (lambda: kc.perm_block_sums(dist, labels)) if kc else None,
            2,
        )

    # end-to-end replication of the max-norm experiment inner loop
    spec = LevySpec(drift=np.zeros(2), sigma=np.array([[1.0, -0.8], [-0.8, 1.0]]))

    def replicate():
        path = sample_path(spec, 1.0, 1e-5, RngStream(1, 7))
        split_at_max_norm(path)

    t = timeit(replicate, 5)
    print(f"\nmax-norm replication (sim + split, 1e5 steps): {t * 1e3:.1f} ms "
          f"-> {1.0 / t:.0f} replications/s single-threaded")


if __name__ == "__main__":
    main()
