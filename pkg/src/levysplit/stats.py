"""Statistical machinery for the verification experiments.

The workhorse is the two-sample energy distance with a permutation p-value
(the verification targets are multivariate laws, where classical KS does
not apply); one-sample KS and Pearson chi-square cover the scalar and
discrete comparisons, and a small product-kernel KDE produces plot-ready
density grids.
"""

from __future__ import annotations

from dataclasses import dataclass

import os

import numpy as np
from scipy.spatial.distance import cdist
from scipy.stats import chi2 as chi2_dist
from scipy.stats import kstest

from . import kernels
from .sim import as_generator


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p_value: float
    n_a: int
    n_b: int
    method: str

    def __post_init__(self):
        if not np.isfinite(self.statistic):
            raise ValueError("statistic must be finite")
        if not 0.0 <= self.p_value <= 1.0:
            raise ValueError("p-value must lie in [0, 1]")


def _as_points(a) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2 or a.shape[0] == 0:
        raise ValueError("samples must be a nonempty list of vectors")
    return a


def _energy_from_sums(s_aa, s_bb, s_ab, n, m):
    # grouping the within terms keeps the result exactly symmetric in (a, b)
    return 2.0 * s_ab / (n * m) - (s_aa / (n * n) + s_bb / (m * m))


def energy_statistic(a, b) -> float:
    """V-statistic energy distance 2 E|a-b| - E|a-a'| - E|b-b'| between two
    point clouds (full double sums including the zero diagonal)."""
    a = _as_points(a)
    b = _as_points(b)
    # canonical orientation of the cross matrix keeps the summation order,
    # and hence the float result, invariant under swapping the arguments
    x, y = (a, b) if (a.shape, a.tobytes()) <= (b.shape, b.tobytes()) else (b, a)
    s_ab = cdist(x, y).sum()
    s_aa = cdist(a, a).sum()
    s_bb = cdist(b, b).sum()
    return float(_energy_from_sums(s_aa, s_bb, s_ab, a.shape[0], b.shape[0]))


def energy_permutation_test(a, b, n_perm: int, rng) -> TestResult:
    """Permutation test of equality in law based on the energy statistic.

    The pooled distance matrix is computed once; each permutation reassigns
    group labels.  p = (1 + #{permuted >= observed}) / (n_perm + 1), so a
    p-value of 0 is impossible.
    """
    if n_perm < 99:
        raise ValueError("need at least 99 permutations")
    a = _as_points(a)
    b = _as_points(b)
    n, m = a.shape[0], b.shape[0]
    pooled = np.vstack([a, b])
    dist = cdist(pooled, pooled)

    gen = as_generator(rng)
    total = n + m
    labels = np.zeros((n_perm + 1, total), dtype=bool)
    labels[0, :n] = True  # row 0 is the observed assignment
    keys = gen.random((n_perm, total))
    order = np.argsort(keys, axis=1)
    rows = np.repeat(np.arange(1, n_perm + 1), n)
    labels[rows, order[:, :n].ravel()] = True

    s_aa, s_bb, s_ab = kernels.perm_block_sums(dist, labels)
    stats = _energy_from_sums(s_aa, s_bb, s_ab, n, m)
    observed = stats[0]
    p = (1.0 + int(np.sum(stats[1:] >= observed))) / (n_perm + 1.0)
    return TestResult(statistic=float(observed), p_value=float(p), n_a=n, n_b=m, method="energy-permutation")


def energy_null_calibration(n_rep: int, n: int, n_perm: int, rng, sampler=None) -> np.ndarray:
    """p-values of the permutation test over repeated identical-law pairs.

    By default both samples are standard normal point clouds in the plane;
    pass ``sampler(gen, n)`` to calibrate against another null.
    """
    master = rng
    ps = np.empty(n_rep)
    for i in range(n_rep):
        gen = master.child(101, i)
        if sampler is None:
            a = gen.standard_normal((n, 2))
            b = gen.standard_normal((n, 2))
        else:
            a = sampler(gen, n)
            b = sampler(gen, n)
        ps[i] = energy_permutation_test(a, b, n_perm, gen).p_value
    return ps


def ks_test(samples, cdf) -> TestResult:
    """One-sample Kolmogorov-Smirnov test against a callable CDF
    (asymptotic p-value)."""
    samples = np.asarray(samples, dtype=np.float64)
    if samples.size == 0:
        raise ValueError("empty sample")
    res = kstest(samples, cdf, method="asymp")
    return TestResult(
        statistic=float(res.statistic),
        p_value=float(min(max(res.pvalue, 0.0), 1.0)),
        n_a=samples.size,
        n_b=0,
        method="ks",
    )


def _pool_cells(counts, expected, min_expected=5.0):
    """Merge adjacent cells left to right until every pooled cell has the
    required expected count; a small remainder is folded into the last cell."""
    pooled_c, pooled_e = [], []
    acc_c = acc_e = 0.0
    for c, e in zip(counts, expected):
        acc_c += c
        acc_e += e
        if acc_e >= min_expected:
            pooled_c.append(acc_c)
            pooled_e.append(acc_e)
            acc_c = acc_e = 0.0
    if acc_e > 0:
        if pooled_e:
            pooled_c[-1] += acc_c
            pooled_e[-1] += acc_e
        else:
            pooled_c.append(acc_c)
            pooled_e.append(acc_e)
    return np.asarray(pooled_c), np.asarray(pooled_e)


def chi2_test(observed_counts, expected_probs) -> TestResult:
    """Pearson chi-square of counts against a fully specified discrete law
    (k - 1 degrees of freedom after pooling low-expectation cells)."""
    counts = np.asarray(observed_counts, dtype=np.float64)
    probs = np.asarray(expected_probs, dtype=np.float64)
    if counts.shape != probs.shape:
        raise ValueError("observed_counts and expected_probs must have equal length")
    if abs(probs.sum() - 1.0) > 1e-9:
        raise ValueError("expected probabilities must sum to 1 within 1e-9")
    total = counts.sum()
    pooled_c, pooled_e = _pool_cells(counts, total * probs)
    if pooled_c.size < 2:
        raise ValueError("fewer than two cells after pooling")
    stat = float(np.sum((pooled_c - pooled_e) ** 2 / pooled_e))
    dof = pooled_c.size - 1
    p = float(chi2_dist.sf(stat, dof))
    return TestResult(statistic=stat, p_value=p, n_a=int(total), n_b=0, method="chi2")


def chi2_two_sample(counts_a, counts_b) -> TestResult:
    """Chi-square homogeneity test of two count vectors over the same
    support (pooled-margin expectations, k - 1 degrees of freedom)."""
    ca = np.asarray(counts_a, dtype=np.float64)
    cb = np.asarray(counts_b, dtype=np.float64)
    if ca.shape != cb.shape:
        raise ValueError("count vectors must have equal length")
    na, nb = ca.sum(), cb.sum()
    pooled = (ca + cb) / (na + nb)
    # pool cells jointly so both groups keep expected counts >= 5
    keep_e = np.minimum(na, nb) * pooled
    merged_a, _ = _pool_cells(ca, keep_e)
    merged_b, _ = _pool_cells(cb, keep_e)
    if merged_a.size < 2:
        raise ValueError("fewer than two cells after pooling")
    pa = (merged_a + merged_b) / (na + nb)
    ea, eb = na * pa, nb * pa
    stat = float(np.sum((merged_a - ea) ** 2 / ea) + np.sum((merged_b - eb) ** 2 / eb))
    dof = merged_a.size - 1
    p = float(chi2_dist.sf(stat, dof))
    return TestResult(statistic=stat, p_value=p, n_a=int(na), n_b=int(nb), method="chi2-2sample")


def kde2d(samples, grid_x, grid_y, bandwidth=None) -> np.ndarray:
    """Gaussian product-kernel density on a rectangular grid.

    Bandwidth defaults to Silverman's rule per coordinate
    (sigma_hat * n^(-1/6) for two dimensions); pass a scalar or a pair to
    override.  Returns a (len(grid_x), len(grid_y)) matrix.
    """
    pts = _as_points(samples)
    if pts.shape[0] < 2 or pts.shape[1] != 2:
        raise ValueError("need at least two 2-dimensional samples")
    gx = np.asarray(grid_x, dtype=np.float64)
    gy = np.asarray(grid_y, dtype=np.float64)
    if bandwidth is None:
        sd = pts.std(axis=0, ddof=1)
        if np.any(sd <= 0):
            raise ValueError("degenerate sample: zero variance in a coordinate")
        h = sd * pts.shape[0] ** (-1.0 / 6.0)
    else:
        h = np.broadcast_to(np.asarray(bandwidth, dtype=np.float64), (2,)).copy()
        if np.any(h <= 0):
            raise ValueError("bandwidth must be positive")
    kx = np.exp(-0.5 * ((pts[:, 0:1] - gx[None, :]) / h[0]) ** 2) / (h[0] * np.sqrt(2 * np.pi))
    ky = np.exp(-0.5 * ((pts[:, 1:2] - gy[None, :]) / h[1]) ** 2) / (h[1] * np.sqrt(2 * np.pi))
    return kx.T @ ky / pts.shape[0]


def write_kde_csv(f, grid_x, grid_y, density) -> None:
    """Emit a density matrix as ``x,y,density`` rows."""
    close = False
    if isinstance(f, (str, bytes, os.PathLike)):
        f = open(f, "w", newline="")
        close = True
    try:
        f.write("x,y,density\n")
        for i, x in enumerate(grid_x):
            for j, y in enumerate(grid_y):
                f.write(f"{x:.17g},{y:.17g},{density[i, j]:.17g}\n")
    finally:
        if close:
            f.close()
