"""Nuisance-parameter estimation for the studentized change-point tests.

Two quantities scale the test statistics: the long-run standard
deviation of the (rank or raw) partial sums, estimated by
non-overlapping block subsampling, and the density of the pairwise
difference distribution at zero, estimated by an Epanechnikov kernel
over all pairwise gaps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from . import _backend
from .ustat import SeriesLike, empirical_cdf_values, series_values


class DegenerateNuisanceError(ValueError):
    """A scale estimate came out non-positive, so studentizing is impossible."""


def fixed_block_length(n: int) -> int:
    """floor((3n)^(1/3)) + 1 with exact integer cube roots, clamped into [1, n]."""
    n = int(n)
    if n < 1:
        raise ValueError("need a positive sample size")
    m = 3 * n
    r = round(m ** (1.0 / 3.0))
    # float cube root can miss exact cubes by one in both directions
    while r**3 > m:
        r -= 1
    while (r + 1) ** 3 <= m:
        r += 1
    return min(max(r + 1, 1), n)


def lag1_autocorr(y: SeriesLike) -> float:
    """Lag-one sample autocorrelation, clamped into (-0.999, 0.999).

    Uses the biased (divide by n) covariance normalization around the
    sample mean. Constant series have no autocorrelation to speak of.
    """
    v = series_values(y)
    n = v.shape[0]
    if n < 2:
        raise ValueError("need at least 2 observations for a lag-1 autocorrelation")
    d = v - v.mean()
    denom = float(np.dot(d, d))
    if denom == 0.0:
        raise DegenerateNuisanceError("constant series has undefined autocorrelation")
    r1 = float(np.dot(d[:-1], d[1:])) / denom
    return min(max(r1, -0.999), 0.999)


def adaptive_block_length(n: int, phi_hat: float) -> int:
    """ceil(n^(1/3) * (2*phi / (1 - phi^2))^(2/3)), clamped into [1, n].

    Nonpositive dependence estimates give the minimal length 1.
    """
    n = int(n)
    if n < 1:
        raise ValueError("need a positive sample size")
    phi_hat = float(phi_hat)
    if not abs(phi_hat) < 1:
        raise ValueError(f"phi_hat must lie in (-1, 1), got {phi_hat!r}")
    if phi_hat <= 0.0:
        return 1
    raw = n ** (1.0 / 3.0) * (2.0 * phi_hat / (1.0 - phi_hat * phi_hat)) ** (2.0 / 3.0)
    length = max(math.ceil(raw), 1)
    return min(length, n)


@dataclass(frozen=True)
class BlockPolicy:
    """How the subsampling block length is chosen: fixed rule or adaptive."""

    kind: str

    _KINDS = ("fixed", "adaptive")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ValueError(f"block policy must be one of {self._KINDS}, got {self.kind!r}")

    def block_length(self, x: SeriesLike) -> int:
        v = series_values(x)
        n = v.shape[0]
        if self.kind == "fixed":
            return fixed_block_length(n)
        return adaptive_block_length(n, lag1_autocorr(empirical_cdf_values(v)))


FIXED = BlockPolicy("fixed")
ADAPTIVE = BlockPolicy("adaptive")


def as_block_policy(policy: Union[BlockPolicy, str]) -> BlockPolicy:
    if isinstance(policy, BlockPolicy):
        return policy
    return BlockPolicy(str(policy))


def subsample_sigma(y: SeriesLike, l: int) -> float:
    """Long-run standard deviation from non-overlapping block sums.

    sigma_hat = sqrt(pi / (2l)) * mean_i |S_i| over the floor(n/l) complete
    blocks S_i = y_{(i-1)l+1} + ... + y_{il}; exactly unbiased when the
    block sums are centered Gaussian.
    """
    v = series_values(y)
    n = v.shape[0]
    l = int(l)
    if not 1 <= l <= n:
        raise ValueError(f"block length {l} out of range 1..{n}")
    nb = n // l
    sums = v[: nb * l].reshape(nb, l).sum(axis=1)
    return math.sqrt(math.pi / (2.0 * l)) * float(np.mean(np.abs(sums)))


def block_variance_sigma(y: SeriesLike, l: int) -> float:
    """Long-run standard deviation from second moments of block sums.

    sigma_hat = sqrt(mean_i S_i^2 / l) over the floor(n/l) complete blocks.
    Unlike the absolute-moment form this needs no Gaussian block limit, so
    it stays calibrated on raw (possibly heavy-tailed) observations even at
    short block lengths, and it tracks the partial-sum scale when the
    variance is infinite. Used to studentize the raw-scale cumulative-sum
    statistic; rank statistics keep the absolute-moment estimator, whose
    inputs are bounded.
    """
    v = series_values(y)
    n = v.shape[0]
    l = int(l)
    if not 1 <= l <= n:
        raise ValueError(f"block length {l} out of range 1..{n}")
    nb = n // l
    sums = v[: nb * l].reshape(nb, l).sum(axis=1)
    return math.sqrt(float(np.mean(sums * sums)) / l)


def sigma_for_rank_tests(x: SeriesLike, policy: Union[BlockPolicy, str] = FIXED) -> Tuple[float, int]:
    """Scale estimate for rank statistics: subsampling applied to F_n(x_t) - 1/2.

    Returns ``(sigma_hat, block_length)``.
    """
    v = series_values(x)
    if v.shape[0] < 2:
        raise ValueError("need at least 2 observations to estimate a scale")
    pol = as_block_policy(policy)
    l = pol.block_length(v)
    sigma = subsample_sigma(empirical_cdf_values(v) - 0.5, l)
    return sigma, l


@dataclass(frozen=True)
class Bandwidth:
    """A positive kernel bandwidth and the rule that produced it."""

    value: float
    rule: str = "manual"

    def __post_init__(self):
        if not (self.value > 0 and math.isfinite(self.value)):
            raise ValueError(f"bandwidth must be positive and finite, got {self.value!r}")


def default_bandwidth(x: SeriesLike) -> Bandwidth:
    """IQR-based rule b = max(IQR, eps) * n^(-1/5).

    eps = 1e-8 * (1 + |median|) keeps the bandwidth positive for
    zero-spread quartiles.
    """
    v = series_values(x)
    n = v.shape[0]
    q75, q25 = np.percentile(v, [75.0, 25.0])
    iqr = float(q75 - q25)
    eps = 1e-8 * (1.0 + abs(float(np.median(v))))
    return Bandwidth(value=max(iqr, eps) * n ** (-0.2), rule="iqr")


def u_hat_zero(x: SeriesLike, b: Union[Bandwidth, float, None] = None) -> float:
    """Kernel estimate of the pairwise-difference density at zero.

    u_hat(0) = 2 / (n(n-1)b) * sum_{i<j} K((x_i - x_j)/b) with the
    Epanechnikov kernel K(u) = 0.75(1-u^2) on |u| <= 1.
    """
    v = series_values(x)
    n = v.shape[0]
    if n < 2:
        raise ValueError("need at least 2 observations to estimate u(0)")
    if b is None:
        b = default_bandwidth(v)
    bw = b.value if isinstance(b, Bandwidth) else float(b)
    if not (bw > 0):
        raise ValueError(f"bandwidth must be positive, got {bw!r}")
    s = _backend.epanechnikov_pair_sum(v, bw)
    return 2.0 * s / (n * (n - 1) * bw)
