"""Shared oracles and fixtures.

The brute-force implementations here are deliberately independent of the
package internals: they enumerate pairs with numpy outer products so that
the fast incremental algorithms can be checked against them exactly.
"""

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "suite",
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


def brute_split_diffs(x, k):
    """All pairwise differences x_j - x_i with i <= k < j, as a flat array."""
    x = np.asarray(x, dtype=np.float64)
    return np.subtract.outer(x[k:], x[:k]).ravel()


def brute_hl_median(x, k):
    d = np.sort(brute_split_diffs(x, k))
    m = d.shape[0]
    # median = average of the two central order statistics for even counts
    lo = (m - 1) // 2
    hi = m // 2
    return 0.5 * (d[lo] + d[hi])


def brute_hl_profile(x):
    n = len(x)
    return np.array([brute_hl_median(x, k) for k in range(1, n)])


def brute_wmw_doubled(x):
    """2*D_k for k=1..n-1 with D_k = sum over i<=k<j of (1{xi<xj} + .5*1{=} - .5)."""
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[0]
    out = np.empty(n - 1, dtype=np.int64)
    for k in range(1, n):
        a, b = x[:k], x[k:]
        less = np.sum(a[:, None] < b[None, :])
        greater = np.sum(a[:, None] > b[None, :])
        out[k - 1] = less - greater
    return out


def brute_u_process(x, k, t):
    d = brute_split_diffs(x, k)
    return float(np.mean(d <= t))


def brute_epan_pair_sum(x, b):
    x = np.asarray(x, dtype=np.float64)
    u = np.subtract.outer(x, x) / b
    k = 0.75 * (1.0 - u * u) * (np.abs(u) <= 1.0)
    iu = np.triu_indices(x.shape[0], 1)
    return float(np.sum(k[iu]))


@pytest.fixture
def rng():
    return np.random.default_rng(0xC0FFEE)


def random_series(rng, n, style="continuous"):
    if style == "ties":
        return rng.integers(-3, 4, size=n).astype(np.float64)
    if style == "heavy":
        return rng.standard_t(2, size=n)
    return rng.standard_normal(n)
