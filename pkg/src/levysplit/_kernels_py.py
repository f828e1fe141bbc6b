"""Numpy implementations of the scan kernels.

These are the reference semantics; the C backend in ``_kernels_c`` must
reproduce them.  The cumulative ops below are sequential-order sums, so the
two backends agree bitwise on path scans (block sums in the permutation
kernel may differ in the last few ulps because of BLAS summation order).
"""

import numpy as np


def argmin_last(z):
    """Largest index attaining the minimum of ``z``."""
    z = np.asarray(z, dtype=np.float64)
    return int(z.shape[0] - 1 - np.argmin(z[::-1]))


def argmax_last(z):
    """Largest index attaining the maximum of ``z``."""
    z = np.asarray(z, dtype=np.float64)
    return int(z.shape[0] - 1 - np.argmax(z[::-1]))


def argmax_norm_last(values):
    """Last index of maximal Euclidean norm over the rows of ``values``.

    Returns ``(index, max_squared_norm)``.
    """
    v = np.asarray(values, dtype=np.float64)
    ss = np.einsum("ij,ij->i", v, v)
    i = argmax_last(ss)
    return i, float(ss[i])


def conditioned_pair_scan(increments, z):
    """One pass of the two-sided occupation-time construction.

    ``increments`` has one row per grid step and ``z`` holds the projected
    path value at the right endpoint of each step.  Steps with ``z > 0`` are
    routed to the up-process, the rest to the down-process; both sides are
    returned as cumulative sums starting from 0 together with the occupation
    counts and the step indices (1-based) at which each side advanced.
    """
    inc = np.ascontiguousarray(increments, dtype=np.float64)
    z = np.ascontiguousarray(z, dtype=np.float64)
    n, d = inc.shape
    mask = z > 0.0
    zero = np.zeros((1, d))
    a_plus = np.concatenate(([0], np.cumsum(mask)))
    a_minus = np.concatenate(([0], np.cumsum(~mask)))
    alpha_plus = np.concatenate(([0], np.flatnonzero(mask) + 1))
    alpha_minus = np.concatenate(([0], np.flatnonzero(~mask) + 1))
    up = np.concatenate([zero, np.cumsum(inc[mask], axis=0)])
    down = np.concatenate([zero, np.cumsum(inc[~mask], axis=0)])
    y_plus = np.concatenate([zero, np.cumsum(inc * mask[:, None], axis=0)])
    y_minus = np.concatenate([zero, np.cumsum(inc * (~mask)[:, None], axis=0)])
    return a_plus, a_minus, alpha_plus, alpha_minus, up, down, y_plus, y_minus


def perm_block_sums(dist, labels):
    """Two-block sums of a pooled distance matrix under label assignments.

    ``dist`` is the symmetric (N, N) pooled distance matrix and ``labels`` a
    (P, N) boolean matrix, one candidate group-a assignment per row.  Returns
    arrays (s_aa, s_bb, s_ab) of full double sums (diagonal included) per row.
    """
    dist = np.ascontiguousarray(dist, dtype=np.float64)
    lab = np.ascontiguousarray(labels, dtype=np.float64)
    total = dist.sum()
    t = dist @ lab.T  # (N, P)
    s_aa = np.einsum("pn,np->p", lab, t)
    col = t.sum(axis=0)
    s_ab = col - s_aa
    s_bb = total - 2.0 * col + s_aa
    return s_aa, s_bb, s_ab
