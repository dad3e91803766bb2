"""Pure-Python sweep kernels.

Fallback twins of the compiled routines in ``_kernels``; selection
between the two happens in ``_backend``. Results must match the
compiled versions bitwise for the order-statistic sweeps and to
floating round-off for the kernel sum.
"""

from __future__ import annotations

import numpy as np

from .multiset import DiffMultiset


def diff_sweep(x, sel_lo, sel_hi, t, want_count):
    """Order statistics of the split pairwise-difference multiset, all splits.

    For each split k = 1..n-1 let M_k = {x_j - x_i : i <= k < j} (1-based
    halves, |M_k| = k(n-k)). Returns ``(q, counts)`` where

        q[k-1] = 0.5 * (select(M_k, sel_lo[k-1]) + select(M_k, sel_hi[k-1]))
        counts[k-1] = #{d in M_k : d <= t}        (zeros when want_count=False)

    ``select`` is the 1-based order statistic. Maintains one DiffMultiset
    across splits: advancing k removes the k differences that ended on the
    newcomer and inserts the n-k-1 differences that now start on it.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    n = x.shape[0]
    q = np.empty(n - 1, dtype=np.float64)
    counts = np.zeros(n - 1, dtype=np.int64)
    ms = DiffMultiset()
    for j in range(1, n):
        ms.insert(x[j] - x[0])
    _record(ms, 0, sel_lo, sel_hi, t, want_count, q, counts)
    for c in range(1, n - 1):
        xc = x[c]
        for i in range(c):
            ms.delete(xc - x[i])
        for j in range(c + 1, n):
            ms.insert(x[j] - xc)
        _record(ms, c, sel_lo, sel_hi, t, want_count, q, counts)
    return q, counts


def _record(ms, idx, sel_lo, sel_hi, t, want_count, q, counts):
    lo = int(sel_lo[idx])
    hi = int(sel_hi[idx])
    a = ms.select(lo)
    b = a if hi == lo else ms.select(hi)
    q[idx] = 0.5 * (a + b)
    if want_count:
        counts[idx] = ms.count_at_most(t)


def wmw_twod(x):
    """Twice the rank double sum D_k for every split, as exact integers.

    2*D_k = sum_{i<=k<j} sign-score with score(x_i, x_j) = +1 if x_i < x_j,
    0 if tied, -1 if x_i > x_j. Incremental in the newcomer: moving x_c from
    the right half to the left half changes 2*D by
    (#right above x_c - #right below) - (#left below x_c - #left above).
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    n = x.shape[0]
    out = np.empty(n - 1, dtype=np.int64)
    left = DiffMultiset()
    right = DiffMultiset(x)
    two_d = 0
    for k in range(1, n):
        v = float(x[k - 1])
        right.delete(v)
        r_below = right.count_less(v)
        r_above = len(right) - right.count_at_most(v)
        l_below = left.count_less(v)
        l_above = len(left) - left.count_at_most(v)
        two_d += (r_above - r_below) - (l_below - l_above)
        left.insert(v)
        out[k - 1] = two_d
    return out


def epan_pair_sum(x, b):
    """Sum of 0.75*(1 - (d/b)^2) over all pairwise gaps d = |x_i - x_j| <= b, i < j."""
    xs = np.sort(np.asarray(x, dtype=np.float64))
    n = xs.shape[0]
    lo = np.searchsorted(xs, xs - b, side="left")
    total = 0.0
    for i in range(n):
        if lo[i] < i:
            u = (xs[i] - xs[lo[i]:i]) / b
            total += float(np.sum(0.75 * (1.0 - u * u)))
    return total
