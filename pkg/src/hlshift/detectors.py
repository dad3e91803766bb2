"""The three change-point tests: HLE, CUSUM and WMW.

Each test maximizes a split profile over k, studentizes the maximum and
compares it against the sup-of-Brownian-bridge law. The profile
functions are shared verbatim by the Monte Carlo harness so simulated
and reported statistics are bitwise identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Union

import numpy as np

from . import _backend
from .asymptotics import kolmogorov_cdf
from .nuisance import (
    BlockPolicy,
    DegenerateNuisanceError,
    as_block_policy,
    default_bandwidth,
    block_variance_sigma,
    sigma_for_rank_tests,
    u_hat_zero,
)
from .ustat import SeriesLike, SplitProfile, hl_split_median, series_values

TEST_NAMES = ("cusum", "wmw", "hle")


@dataclass(frozen=True)
class TestReport:
    """Outcome of one studentized change-point test."""

    test_name: str
    statistic: float
    p_value: float
    change_point: int
    raw_profile: SplitProfile
    sigma_hat: float
    block_length: int
    block_policy_name: str
    u_hat_zero: Optional[float] = None  # HLE only

    def shift_estimate(self, x: SeriesLike) -> float:
        """Pairwise-difference median across the estimated split."""
        return hl_split_median(x, self.change_point)


def hle_weighted_profile(x: SeriesLike) -> SplitProfile:
    """k(n-k)/n^2 * |median of cross-split differences| for every k."""
    v = series_values(x)
    n = v.shape[0]
    if n < 2:
        raise ValueError("need at least 2 observations")
    meds = _backend.median_profile(v)
    k = np.arange(1, n, dtype=np.int64)
    w = (k * (n - k)) / float(n * n)
    return SplitProfile.from_values(w * np.abs(meds))


def cusum_profile(x: SeriesLike) -> SplitProfile:
    """Partial-sum bridge S_k - (k/n) S_n for every k.

    Accumulates mean-centered values: the bridge is identical in exact
    arithmetic, and centering first keeps the floating-point error at
    per-element rounding under large level translations.
    """
    v = series_values(x)
    n = v.shape[0]
    if n < 2:
        raise ValueError("need at least 2 observations")
    s = np.cumsum(v - v.mean())
    k = np.arange(1, n, dtype=np.float64)
    return SplitProfile.from_values(s[:-1] - (k / n) * s[-1])


def wmw_profile(x: SeriesLike) -> SplitProfile:
    """Rank double sum D_k (ties scored 1/2) for every k."""
    v = series_values(x)
    if v.shape[0] < 2:
        raise ValueError("need at least 2 observations")
    return SplitProfile.from_values(_backend.wmw_twod(v) / 2.0)


def _hle_scale(n: int, sigma_hat: float, u_hat: float) -> float:
    return math.sqrt(n) * (u_hat / sigma_hat)


def _wmw_scale(n: int, sigma_hat: float) -> float:
    return 1.0 / (sigma_hat * n**1.5)


def _cusum_scale(n: int, sigma_hat: float) -> float:
    return 1.0 / (sigma_hat * math.sqrt(n))


def _require_positive(name: str, value: float) -> float:
    if not (value > 0 and math.isfinite(value)):
        raise DegenerateNuisanceError(f"{name} must be positive to studentize, got {value!r}")
    return value


def _report(test_name, profile, scale, sigma_hat, block_length, block_policy_name, u_hat_zero=None):
    stat = scale * profile.max_abs
    return TestReport(
        test_name=test_name,
        statistic=stat,
        p_value=1.0 - kolmogorov_cdf(stat),
        change_point=profile.change_point,
        raw_profile=profile,
        sigma_hat=sigma_hat,
        block_length=block_length,
        block_policy_name=block_policy_name,
        u_hat_zero=u_hat_zero,
    )


def hle_statistic(
    x: SeriesLike,
    sigma_hat: float,
    u_hat: float,
    *,
    block_length: int = 0,
    block_policy: str = "external",
) -> TestReport:
    """sqrt(n) * (u_hat / sigma_hat) * max_k weighted |split median|."""
    v = series_values(x)
    if v.shape[0] < 4:
        raise ValueError("need at least 4 observations to studentize the split medians")
    _require_positive("sigma_hat", sigma_hat)
    _require_positive("u_hat", u_hat)
    profile = hle_weighted_profile(v)
    scale = _hle_scale(v.shape[0], sigma_hat, u_hat)
    return _report("hle", profile, scale, sigma_hat, block_length, block_policy, u_hat)


def cusum_statistic(
    x: SeriesLike,
    sigma_hat: float,
    *,
    block_length: int = 0,
    block_policy: str = "external",
) -> TestReport:
    """max_k |S_k - (k/n) S_n| / (sigma_hat * sqrt(n))."""
    v = series_values(x)
    _require_positive("sigma_hat", sigma_hat)
    profile = cusum_profile(v)
    return _report("cusum", profile, _cusum_scale(v.shape[0], sigma_hat), sigma_hat, block_length, block_policy)


def wmw_statistic(
    x: SeriesLike,
    sigma_hat: float,
    *,
    block_length: int = 0,
    block_policy: str = "external",
) -> TestReport:
    """max_k |D_k| / (sigma_hat * n^(3/2))."""
    v = series_values(x)
    _require_positive("sigma_hat", sigma_hat)
    profile = wmw_profile(v)
    return _report("wmw", profile, _wmw_scale(v.shape[0], sigma_hat), sigma_hat, block_length, block_policy)


def decide(report: TestReport, alpha: float = 0.05) -> bool:
    """Reject the no-change null iff p < alpha (strict)."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")
    return report.p_value < alpha


def run_test(
    x: SeriesLike,
    test: str = "hle",
    policy: Union[BlockPolicy, str] = "fixed",
) -> TestReport:
    """Full pipeline: estimate the nuisance parameters, then studentize.

    CUSUM uses the subsampling scale of the centered raw series; the rank
    tests use the scale of F_n(x_t) - 1/2. The block length follows
    ``policy`` in both cases.
    """
    test = str(test).lower()
    if test not in TEST_NAMES:
        raise ValueError(f"unknown test {test!r}; expected one of {TEST_NAMES}")
    v = series_values(x)
    if v.shape[0] < 2:
        raise ValueError("need at least 2 observations")
    pol = as_block_policy(policy)
    if test == "cusum":
        l = pol.block_length(v)
        sigma = block_variance_sigma(v - v.mean(), l)
        _require_positive("sigma_hat", sigma)
        return cusum_statistic(v, sigma, block_length=l, block_policy=pol.kind)
    sigma, l = sigma_for_rank_tests(v, pol)
    _require_positive("sigma_hat", sigma)
    if test == "wmw":
        return wmw_statistic(v, sigma, block_length=l, block_policy=pol.kind)
    u0 = u_hat_zero(v, default_bandwidth(v))
    _require_positive("u_hat", u0)
    return hle_statistic(v, sigma, u0, block_length=l, block_policy=pol.kind)


def run_all_tests(
    x: SeriesLike,
    tests: Sequence[str] = TEST_NAMES,
    policy: Union[BlockPolicy, str] = "fixed",
) -> Dict[str, TestReport]:
    """run_test for each requested test, keyed by test name."""
    return {t: run_test(x, t, policy) for t in tests}
