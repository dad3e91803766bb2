"""Two-sample U-process and U-quantile machinery over a split series.

For a split point k the two halves are {x_1..x_k} and {x_{k+1}..x_n}
(1-based). The pairwise comparisons across the split drive everything
here: the empirical distribution of x_j - x_i, its quantiles, and the
split median that the level-shift test maximizes over k.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

from . import _backend


def _validated_values(values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"expected a 1-d series, got shape {arr.shape}")
    if arr.shape[0] == 0:
        raise ValueError("series must be non-empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError("series values must be finite")
    return np.ascontiguousarray(arr)


@dataclass(frozen=True)
class TimeSeries:
    """A univariate series, optionally tagged with calendar months (1..12)."""

    values: np.ndarray
    months: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "values", _validated_values(self.values))
        if self.months is not None:
            months = np.asarray(self.months, dtype=np.int64)
            if months.shape != self.values.shape:
                raise ValueError("months must align with values")
            if months.size and (months.min() < 1 or months.max() > 12):
                raise ValueError("months must lie in 1..12")
            object.__setattr__(self, "months", np.ascontiguousarray(months))

    def __len__(self) -> int:
        return int(self.values.shape[0])


SeriesLike = Union[TimeSeries, Sequence[float], np.ndarray]


def series_values(x: SeriesLike) -> np.ndarray:
    """Validated float64 view of a TimeSeries or array-like."""
    if isinstance(x, TimeSeries):
        return x.values
    return _validated_values(x)


@dataclass(frozen=True)
class PairKernel:
    """A measurable function of an (earlier, later) observation pair.

    ``monotone_tag`` records that g(x, y) is nonincreasing in x and
    nondecreasing in y, which the quantile inversion relies on.
    """

    g: Callable[[float, float], float]
    monotone_tag: bool = True
    name: str = "custom"


DIFFERENCE_KERNEL = PairKernel(g=lambda x, y: y - x, monotone_tag=True, name="difference")


@dataclass(frozen=True)
class SplitProfile:
    """Per-split statistic values for k = 1..n-1 plus the maximizer.

    ``change_point`` is the smallest k attaining max |values|; ``max_abs``
    is that maximum.
    """

    values: np.ndarray
    change_point: int
    max_abs: float

    @classmethod
    def from_values(cls, values: np.ndarray) -> "SplitProfile":
        arr = np.asarray(values, dtype=np.float64)
        if arr.ndim != 1 or arr.shape[0] == 0:
            raise ValueError("profile needs at least one split")
        absvals = np.abs(arr)
        idx = int(np.argmax(absvals))  # first occurrence wins ties
        return cls(values=arr, change_point=idx + 1, max_abs=float(absvals[idx]))

    def __len__(self) -> int:
        return int(self.values.shape[0])


def _check_split(n: int, k: int) -> int:
    k = int(k)
    if not 1 <= k <= n - 1:
        raise ValueError(f"split k={k} out of range 1..{n - 1}")
    return k


def _pair_values(v: np.ndarray, k: int, kernel: PairKernel) -> np.ndarray:
    left, right = v[:k], v[k:]
    if kernel is DIFFERENCE_KERNEL:
        return (right[None, :] - left[:, None]).ravel()
    g = kernel.g
    out = np.empty(left.shape[0] * right.shape[0], dtype=np.float64)
    pos = 0
    for a in left:
        for b in right:
            out[pos] = g(a, b)
            pos += 1
    return out


def u_process_at(x: SeriesLike, k: int, t: float, kernel: PairKernel = DIFFERENCE_KERNEL) -> float:
    """Fraction of cross-split pairs with g(x_i, x_j) <= t."""
    v = series_values(x)
    k = _check_split(v.shape[0], k)
    vals = _pair_values(v, k, kernel)
    return int(np.count_nonzero(vals <= t)) / vals.shape[0]


def order_index(p: float, m: int) -> int:
    """Smallest 1-based r with r/m >= p; the generalized-inverse order index."""
    if not 0 < p <= 1:
        raise ValueError(f"p must lie in (0, 1], got {p!r}")
    if m < 1:
        raise ValueError("empty multiset has no quantiles")
    r = int(math.ceil(p * m))
    if r < 1:
        r = 1
    # float ceil can land one off; pin down the defining inequalities exactly
    while r > 1 and (r - 1) / m >= p:
        r -= 1
    while r / m < p:
        r += 1
    return r


def u_quantile_at(x: SeriesLike, k: int, p: float, kernel: PairKernel = DIFFERENCE_KERNEL) -> float:
    """Generalized inverse of the split U-process: smallest t with U(t) >= p.

    Equals the r-th smallest cross-split pair value with r = order_index(p, m),
    m = k(n-k).
    """
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p!r}")
    v = series_values(x)
    k = _check_split(v.shape[0], k)
    vals = _pair_values(v, k, kernel)
    r = order_index(p, vals.shape[0])
    return float(np.partition(vals, r - 1)[r - 1])


def hl_split_median(x: SeriesLike, k: int) -> float:
    """Median of the cross-split pairwise differences {x_j - x_i : i <= k < j}.

    Even multiset sizes average the two central order statistics.
    """
    v = series_values(x)
    k = _check_split(v.shape[0], k)
    vals = _pair_values(v, k, DIFFERENCE_KERNEL)
    m = vals.shape[0]
    lo = (m + 1) // 2
    if m % 2 == 1:
        return float(np.partition(vals, lo - 1)[lo - 1])
    part = np.partition(vals, [lo - 1, lo])
    return float(0.5 * (part[lo - 1] + part[lo]))


def hl_median_profile(x: SeriesLike) -> SplitProfile:
    """All split medians at once via the incremental multiset sweep.

    Matches hl_split_median at every k exactly; runs in O(n^2 log n)
    instead of the O(n^3 log n) of n-1 independent medians.
    """
    v = series_values(x)
    if v.shape[0] < 2:
        raise ValueError("need at least 2 observations for a split profile")
    return SplitProfile.from_values(_backend.median_profile(v))


def u_quantile_profile(x: SeriesLike, p: float):
    """Per-split difference U-quantiles at level p, plus counts of d <= 0.

    Returns ``(q, counts)`` with q[k-1] the level-p generalized-inverse
    quantile of the split multiset and counts[k-1] = #{d <= 0}; both come
    out of one incremental sweep.
    """
    v = series_values(x)
    n = v.shape[0]
    if n < 2:
        raise ValueError("need at least 2 observations for a split profile")
    k = np.arange(1, n, dtype=np.int64)
    m = k * (n - k)
    oi = np.empty(n - 1, dtype=np.int64)
    for i in range(n - 1):
        oi[i] = order_index(p, int(m[i]))
    return _backend.quantile_count_profile(v, oi, 0.0)


def empirical_cdf_values(x: SeriesLike) -> np.ndarray:
    """F_n evaluated at each observation: F_n(x_t) = #{s : x_s <= x_t} / n."""
    v = series_values(x)
    order = np.sort(v)
    return np.searchsorted(order, v, side="right") / v.shape[0]
