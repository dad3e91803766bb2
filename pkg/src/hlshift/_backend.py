"""Backend selection and the typed kernel entry points.

Imports the compiled extension when it was built, otherwise falls back
to the pure-Python kernels. Both expose the same three routines with
identical values (bitwise for the integer/order-statistic sweeps).
"""

from __future__ import annotations

import numpy as np

try:
    from . import _kernels as _impl

    BACKEND = "compiled"
except ImportError:  # pragma: no cover - depends on the build environment
    from . import _kernels_py as _impl

    BACKEND = "pure"


def _validated(values) -> np.ndarray:
    arr = np.ascontiguousarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"expected a 1-d array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("series values must be finite")
    return arr


def median_selectors(n: int):
    """1-based order indices of the lower/upper middle of k(n-k) elements."""
    k = np.arange(1, n, dtype=np.int64)
    m = k * (n - k)
    lo = (m + 1) // 2
    hi = lo + (m + 1) % 2
    return lo, hi


def median_profile(values) -> np.ndarray:
    """Median of {x_j - x_i : i <= k < j} for every split k = 1..n-1."""
    arr = _validated(values)
    n = arr.shape[0]
    if n < 2:
        raise ValueError("need at least 2 observations for a split profile")
    lo, hi = median_selectors(n)
    return _impl.diff_sweep(arr, lo, hi, 0.0, False)[0]


def quantile_count_profile(values, order_indices, t: float):
    """Per-split order statistic plus count of differences <= t.

    ``order_indices[k-1]`` is the 1-based order index to select from the
    split multiset at k. Returns ``(q, counts)``.
    """
    arr = _validated(values)
    n = arr.shape[0]
    if n < 2:
        raise ValueError("need at least 2 observations for a split profile")
    oi = np.ascontiguousarray(order_indices, dtype=np.int64)
    if oi.shape[0] != n - 1:
        raise ValueError("order_indices must have length n-1")
    k = np.arange(1, n, dtype=np.int64)
    m = k * (n - k)
    if np.any(oi < 1) or np.any(oi > m):
        raise ValueError("order indices out of range for their split sizes")
    return _impl.diff_sweep(arr, oi, oi, float(t), True)


def wmw_twod(values) -> np.ndarray:
    """Exact integer 2*D_k (rank double sum) for every split k = 1..n-1."""
    arr = _validated(values)
    if arr.shape[0] < 2:
        raise ValueError("need at least 2 observations for a split profile")
    return _impl.wmw_twod(arr)


def epanechnikov_pair_sum(values, b: float) -> float:
    """Sum of the Epanechnikov kernel over all scaled pairwise gaps."""
    arr = _validated(values)
    if not (b > 0):
        raise ValueError(f"bandwidth must be positive, got {b!r}")
    return float(_impl.epan_pair_sum(arr, float(b)))
