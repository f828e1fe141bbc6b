# cython: boundscheck=False, wraparound=False, cdivision=True
"""C implementations of the hot scan kernels.

Semantics mirror ``_kernels_py`` exactly; path scans are bitwise identical
because both backends accumulate in grid order.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def argmin_last(z):
    cdef const double[::1] zv = np.ascontiguousarray(z, dtype=np.float64)
    cdef Py_ssize_t n = zv.shape[0]
    cdef Py_ssize_t i, best = 0
    cdef double m = zv[0]
    for i in range(1, n):
        if zv[i] <= m:
            m = zv[i]
            best = i
    return best


def argmax_last(z):
    cdef const double[::1] zv = np.ascontiguousarray(z, dtype=np.float64)
    cdef Py_ssize_t n = zv.shape[0]
    cdef Py_ssize_t i, best = 0
    cdef double m = zv[0]
    for i in range(1, n):
        if zv[i] >= m:
            m = zv[i]
            best = i
    return best


def argmax_norm_last(values):
    cdef const double[:, ::1] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef Py_ssize_t n = v.shape[0]
    cdef Py_ssize_t d = v.shape[1]
    cdef Py_ssize_t i, j, best = 0
    cdef double ss, m = 0.0
    for j in range(d):
        m += v[0, j] * v[0, j]
    for i in range(1, n):
        ss = 0.0
        for j in range(d):
            ss += v[i, j] * v[i, j]
        if ss >= m:
            m = ss
            best = i
    return best, m


def conditioned_pair_scan(increments, z):
    cdef const double[:, ::1] inc = np.ascontiguousarray(increments, dtype=np.float64)
    cdef const double[::1] zv = np.ascontiguousarray(z, dtype=np.float64)
    cdef Py_ssize_t n = inc.shape[0]
    cdef Py_ssize_t d = inc.shape[1]
    cdef Py_ssize_t i, j, k = 0

    for i in range(n):
        if zv[i] > 0.0:
            k += 1

    a_plus_arr = np.empty(n + 1, dtype=np.int64)
    a_minus_arr = np.empty(n + 1, dtype=np.int64)
    alpha_plus_arr = np.empty(k + 1, dtype=np.int64)
    alpha_minus_arr = np.empty(n - k + 1, dtype=np.int64)
    up_arr = np.zeros((k + 1, d), dtype=np.float64)
    down_arr = np.zeros((n - k + 1, d), dtype=np.float64)
    y_plus_arr = np.zeros((n + 1, d), dtype=np.float64)
    y_minus_arr = np.zeros((n + 1, d), dtype=np.float64)

    cdef long long[::1] a_plus = a_plus_arr
    cdef long long[::1] a_minus = a_minus_arr
    cdef long long[::1] alpha_plus = alpha_plus_arr
    cdef long long[::1] alpha_minus = alpha_minus_arr
    cdef double[:, ::1] up = up_arr
    cdef double[:, ::1] down = down_arr
    cdef double[:, ::1] y_plus = y_plus_arr
    cdef double[:, ::1] y_minus = y_minus_arr

    cdef Py_ssize_t p = 0, q = 0
    a_plus[0] = 0
    a_minus[0] = 0
    alpha_plus[0] = 0
    alpha_minus[0] = 0
    for i in range(n):
        if zv[i] > 0.0:
            p += 1
            alpha_plus[p] = i + 1
            for j in range(d):
                up[p, j] = up[p - 1, j] + inc[i, j]
                y_plus[i + 1, j] = y_plus[i, j] + inc[i, j]
                y_minus[i + 1, j] = y_minus[i, j]
        else:
            q += 1
            alpha_minus[q] = i + 1
            for j in range(d):
                down[q, j] = down[q - 1, j] + inc[i, j]
                y_minus[i + 1, j] = y_minus[i, j] + inc[i, j]
                y_plus[i + 1, j] = y_plus[i, j]
        a_plus[i + 1] = p
        a_minus[i + 1] = q

    return (a_plus_arr, a_minus_arr, alpha_plus_arr, alpha_minus_arr,
            up_arr, down_arr, y_plus_arr, y_minus_arr)


def perm_block_sums(dist, labels):
    cdef const double[:, ::1] D = np.ascontiguousarray(dist, dtype=np.float64)
    lab_arr = np.ascontiguousarray(labels, dtype=np.uint8)
    cdef const unsigned char[:, ::1] lab = lab_arr
    cdef Py_ssize_t P = lab.shape[0]
    cdef Py_ssize_t N = lab.shape[1]
    s_aa_arr = np.zeros(P, dtype=np.float64)
    s_bb_arr = np.zeros(P, dtype=np.float64)
    s_ab_arr = np.zeros(P, dtype=np.float64)
    cdef double[::1] s_aa = s_aa_arr
    cdef double[::1] s_bb = s_bb_arr
    cdef double[::1] s_ab = s_ab_arr
    cdef Py_ssize_t p, i, j
    cdef double aa, bb, ab, dij
    cdef unsigned char li
    for p in range(P):
        aa = 0.0
        bb = 0.0
        ab = 0.0
        for i in range(N):
            li = lab[p, i]
            for j in range(i + 1, N):
                dij = D[i, j]
                if li:
                    if lab[p, j]:
                        aa += dij
                    else:
                        ab += dij
                else:
                    if lab[p, j]:
                        ab += dij
                    else:
                        bb += dij
        # full double sums: off-diagonal pairs count twice, diagonal is zero
        s_aa[p] = 2.0 * aa
        s_bb[p] = 2.0 * bb
        s_ab[p] = ab
    return s_aa_arr, s_bb_arr, s_ab_arr
