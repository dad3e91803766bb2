# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled sweep kernels.

Same contracts as ``_kernels_py``; the order-statistic sweeps realize the
split multiset as a Fenwick tree over the offline-sorted universe of all
n(n-1)/2 pairwise differences, so insert/delete/select are O(log) with a
tiny constant. Values returned must match the pure versions bitwise.
"""

import numpy as np


cdef inline void _fen_add(int* tree, Py_ssize_t size, Py_ssize_t pos, int delta) noexcept nogil:
    # pos is 1-based
    while pos <= size:
        tree[pos] += delta
        pos += pos & (-pos)


cdef inline long long _fen_prefix(int* tree, Py_ssize_t pos) noexcept nogil:
    cdef long long s = 0
    while pos > 0:
        s += tree[pos]
        pos -= pos & (-pos)
    return s


cdef inline Py_ssize_t _fen_select(int* tree, Py_ssize_t size, Py_ssize_t topbit, long long r) noexcept nogil:
    # 1-based slot of the r-th smallest present element
    cdef Py_ssize_t idx = 0, nxt
    cdef Py_ssize_t bit = topbit
    while bit > 0:
        nxt = idx + bit
        if nxt <= size and tree[nxt] < r:
            idx = nxt
            r -= tree[nxt]
        bit >>= 1
    return idx + 1


def diff_sweep(x, sel_lo, sel_hi, double t, bint want_count):
    """See ``_kernels_py.diff_sweep``; identical contract and values."""
    x_arr = np.ascontiguousarray(x, dtype=np.float64)
    lo_arr = np.ascontiguousarray(sel_lo, dtype=np.int64)
    hi_arr = np.ascontiguousarray(sel_hi, dtype=np.int64)
    cdef double[::1] xv = x_arr
    cdef long long[::1] lov = lo_arr
    cdef long long[::1] hiv = hi_arr
    cdef Py_ssize_t n = xv.shape[0]
    cdef Py_ssize_t m_univ = n * (n - 1) // 2

    diffs = np.empty(m_univ, dtype=np.float64)
    cdef double[::1] dv = diffs
    cdef Py_ssize_t i, j, pos
    pos = 0
    for i in range(n):
        for j in range(i + 1, n):
            dv[pos] = xv[j] - xv[i]
            pos += 1

    order = np.argsort(diffs, kind="stable")
    ranks_np = np.empty(m_univ, dtype=np.int64)
    ranks_np[order] = np.arange(m_univ, dtype=np.int64)
    sorted_vals = np.take(diffs, order)
    cdef long long[::1] ranks = ranks_np
    cdef double[::1] sv = sorted_vals

    cdef Py_ssize_t idx_t = 0
    if want_count:
        idx_t = np.searchsorted(sorted_vals, t, side="right")

    tree_np = np.zeros(m_univ + 1, dtype=np.int32)
    cdef int[::1] tree_mv = tree_np
    cdef int* tree = &tree_mv[0]
    cdef Py_ssize_t topbit = 1
    while topbit * 2 <= m_univ:
        topbit *= 2

    q = np.empty(n - 1, dtype=np.float64)
    counts = np.zeros(n - 1, dtype=np.int64)
    cdef double[::1] qv = q
    cdef long long[::1] cv = counts

    cdef Py_ssize_t k, c, base_c, slot_a, slot_b
    cdef long long lo, hi
    cdef double a, b
    with nogil:
        for k in range(1, n):
            if k == 1:
                # pairs (0, j): flat indices 0..n-2
                for j in range(1, n):
                    _fen_add(tree, m_univ, ranks[j - 1] + 1, 1)
            else:
                c = k - 1  # newcomer crosses from right half to left half
                for i in range(c):
                    _fen_add(tree, m_univ,
                             ranks[i * (2 * n - i - 1) // 2 + (c - i - 1)] + 1, -1)
                base_c = c * (2 * n - c - 1) // 2
                for j in range(c + 1, n):
                    _fen_add(tree, m_univ, ranks[base_c + (j - c - 1)] + 1, 1)
            lo = lov[k - 1]
            hi = hiv[k - 1]
            slot_a = _fen_select(tree, m_univ, topbit, lo)
            a = sv[slot_a - 1]
            if hi == lo:
                b = a
            else:
                slot_b = _fen_select(tree, m_univ, topbit, hi)
                b = sv[slot_b - 1]
            qv[k - 1] = 0.5 * (a + b)
            if want_count:
                cv[k - 1] = _fen_prefix(tree, idx_t)
    return q, counts


def wmw_twod(x):
    """See ``_kernels_py.wmw_twod``; identical contract and values."""
    x_arr = np.ascontiguousarray(x, dtype=np.float64)
    cdef double[::1] xv = x_arr
    cdef Py_ssize_t n = xv.shape[0]

    uniq = np.unique(x_arr)
    pos_np = (np.searchsorted(uniq, x_arr) + 1).astype(np.int64)
    cdef long long[::1] posv = pos_np
    cdef Py_ssize_t u = uniq.shape[0]

    left_np = np.zeros(u + 1, dtype=np.int32)
    right_np = np.zeros(u + 1, dtype=np.int32)
    cdef int[::1] left_mv = left_np
    cdef int[::1] right_mv = right_np
    cdef int* left = &left_mv[0]
    cdef int* right = &right_mv[0]

    out = np.empty(n - 1, dtype=np.int64)
    cdef long long[::1] ov = out

    cdef Py_ssize_t k
    cdef Py_ssize_t p
    cdef long long two_d = 0, n_left = 0, n_right = n
    cdef long long r_below, r_atmost, l_below, l_atmost
    with nogil:
        for k in range(n):
            _fen_add(right, u, posv[k], 1)
        for k in range(1, n):
            p = posv[k - 1]
            _fen_add(right, u, p, -1)
            n_right -= 1
            r_below = _fen_prefix(right, p - 1)
            r_atmost = _fen_prefix(right, p)
            l_below = _fen_prefix(left, p - 1)
            l_atmost = _fen_prefix(left, p)
            two_d += (n_right - r_atmost - r_below) - (l_below - (n_left - l_atmost))
            _fen_add(left, u, p, 1)
            n_left += 1
            ov[k - 1] = two_d
    return out


def epan_pair_sum(x, double b):
    """See ``_kernels_py.epan_pair_sum``; same contract, scalar summation."""
    xs = np.sort(np.asarray(x, dtype=np.float64))
    cdef double[::1] xv = xs
    cdef Py_ssize_t n = xv.shape[0]
    lo_np = np.searchsorted(xs, xs - b, side="left")
    cdef long long[::1] lov = np.ascontiguousarray(lo_np, dtype=np.int64)
    cdef double total = 0.0, uu
    cdef Py_ssize_t i, j
    with nogil:
        for i in range(n):
            for j in range(lov[i], i):
                uu = (xv[i] - xv[j]) / b
                total += 0.75 * (1.0 - uu * uu)
    return total
