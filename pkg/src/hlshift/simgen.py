"""Simulation generators: AR(1) noise with scaled-t innovations and level shifts.

Innovations are Student-t draws divided by a calibration factor chosen
so that the innovation CDF equals the standard normal CDF at 1
(F(1) = 0.8413447...), which puts all tail-weight choices on a common
scale; nu = inf means exactly standard normal innovations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.signal import lfilter
from scipy.special import ndtr, stdtr

from .ustat import TimeSeries, SeriesLike, series_values

_NORMAL_CDF_AT_ONE = float(ndtr(1.0))  # 0.8413447460685429


@dataclass(frozen=True)
class InnovationSpec:
    """Degrees of freedom for the innovation law; inf selects the normal."""

    nu: float

    def __post_init__(self):
        nu = float(self.nu)
        if not (nu > 0):
            raise ValueError(f"degrees of freedom must be positive, got {self.nu!r}")
        object.__setattr__(self, "nu", nu)

    @property
    def is_normal(self) -> bool:
        return math.isinf(self.nu)


def t_scale_factor(nu: float) -> float:
    """s with P(T_nu <= s) = Phi(1); dividing T_nu by s calibrates the scale.

    Found by bisection on the t CDF. Exactly 1.0 for nu = inf.
    """
    nu = float(nu)
    if not (nu > 0):
        raise ValueError(f"degrees of freedom must be positive, got {nu!r}")
    if math.isinf(nu):
        return 1.0
    target = _NORMAL_CDF_AT_ONE
    lo, hi = 0.0, 1.0
    while stdtr(nu, hi) < target:
        hi *= 2.0
        if hi > 1e12:
            raise ArithmeticError("t quantile bracket failed to close")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if stdtr(nu, mid) < target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-14 * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


def draw_innovations(count: int, spec: InnovationSpec, rng: np.random.Generator) -> np.ndarray:
    """Calibrated innovation draws: N(0,1) for nu = inf, else t_nu / s_nu."""
    if spec.is_normal:
        return rng.standard_normal(count)
    return rng.standard_t(spec.nu, count) / t_scale_factor(spec.nu)


@dataclass(frozen=True)
class SimConfig:
    """One simulated-series recipe: AR(1) with a possible mean shift."""

    n: int
    phi: float
    nu: float
    shift_height: float = 0.0
    shift_position: float = 0.5
    burn_in: int = 200

    def __post_init__(self):
        if int(self.n) < 2:
            raise ValueError("series length must be at least 2")
        object.__setattr__(self, "n", int(self.n))
        if not abs(float(self.phi)) < 1:
            raise ValueError(f"AR coefficient must lie in (-1, 1), got {self.phi!r}")
        object.__setattr__(self, "phi", float(self.phi))
        InnovationSpec(self.nu)  # validates
        object.__setattr__(self, "nu", float(self.nu))
        if not 0.0 < float(self.shift_position) < 1.0:
            raise ValueError("shift position must lie strictly inside (0, 1)")
        object.__setattr__(self, "shift_position", float(self.shift_position))
        object.__setattr__(self, "shift_height", float(self.shift_height))
        if int(self.burn_in) < 0:
            raise ValueError("burn-in cannot be negative")
        object.__setattr__(self, "burn_in", int(self.burn_in))


def ar1_generate(
    n: int,
    phi: float,
    innovations: Union[InnovationSpec, float],
    burn_in: int = 200,
    seed=None,
) -> np.ndarray:
    """AR(1) path x_t = phi * x_{t-1} + eps_t started at 0, burn-in discarded.

    The recursion is run in floating point exactly as written, so
    x[t+1] == phi * x[t] + eps[t+1] holds bitwise for the returned stretch.
    ``seed`` is anything numpy's default_rng accepts.
    """
    n = int(n)
    burn_in = int(burn_in)
    if n < 1:
        raise ValueError("series length must be positive")
    if burn_in < 0:
        raise ValueError("burn-in cannot be negative")
    if not abs(float(phi)) < 1:
        raise ValueError(f"AR coefficient must lie in (-1, 1), got {phi!r}")
    spec = innovations if isinstance(innovations, InnovationSpec) else InnovationSpec(innovations)
    rng = np.random.default_rng(seed)
    eps = draw_innovations(burn_in + n, spec, rng)
    # direct-form IIR: y[t] = eps[t] + phi*y[t-1], zero initial state
    path = lfilter([1.0], [1.0, -float(phi)], eps)
    return path[burn_in:]


def inject_shift(x: SeriesLike, height: float, position: float) -> np.ndarray:
    """Add ``height`` to the observations after floor(n * position).

    The change point sits at index floor(n * position) (1-based count of
    pre-shift observations), strictly inside the sample.
    """
    v = series_values(x).copy()
    n = v.shape[0]
    if not 0.0 < float(position) < 1.0:
        raise ValueError("shift position must lie strictly inside (0, 1)")
    split = int(math.floor(n * float(position)))  # always < n; may be 0
    v[split:] += float(height)
    return v


def simulate(config: SimConfig, seed=None) -> TimeSeries:
    """Generate one series per ``config`` (noise plus optional shift)."""
    noise = ar1_generate(config.n, config.phi, InnovationSpec(config.nu), config.burn_in, seed)
    if config.shift_height != 0.0:
        noise = inject_shift(noise, config.shift_height, config.shift_position)
    return TimeSeries(values=noise)
