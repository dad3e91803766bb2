"""Innovation calibration, AR(1) recursion, and shift injection."""

import math

import numpy as np
import pytest
from scipy.stats import t as student_t

from hlshift.simgen import (
    InnovationSpec,
    SimConfig,
    ar1_generate,
    draw_innovations,
    inject_shift,
    simulate,
    t_scale_factor,
)

PHI_AT_ONE = 0.8413447460685429  # standard normal CDF at 1


def test_t_scale_factor_normal_limit():
    assert t_scale_factor(math.inf) == 1.0


@pytest.mark.parametrize("nu", [1.0, 2.0, 3.0, 5.0, 30.0])
def test_t_scale_factor_matches_t_quantile(nu):
    want = student_t.ppf(PHI_AT_ONE, nu)
    assert math.isclose(t_scale_factor(nu), want, rel_tol=1e-10)


def test_t_scale_factor_ordering():
    # heavier tails need more shrink to pin the CDF at 1
    s2, s3 = t_scale_factor(2.0), t_scale_factor(3.0)
    assert s2 > s3 > 1.0
    with pytest.raises(ValueError):
        t_scale_factor(0.0)
    with pytest.raises(ValueError):
        t_scale_factor(-2.0)


def test_innovation_spec_validation():
    assert InnovationSpec(math.inf).is_normal
    assert not InnovationSpec(3.0).is_normal
    with pytest.raises(ValueError):
        InnovationSpec(0.0)
    with pytest.raises(ValueError):
        InnovationSpec(-1.0)


def test_draw_innovations_bitwise_streams():
    a = draw_innovations(100, InnovationSpec(math.inf), np.random.default_rng(5))
    b = np.random.default_rng(5).standard_normal(100)
    assert np.array_equal(a, b)
    c = draw_innovations(100, InnovationSpec(3.0), np.random.default_rng(5))
    d = np.random.default_rng(5).standard_t(3.0, 100) / t_scale_factor(3.0)
    assert np.array_equal(c, d)


@pytest.mark.parametrize("nu", [2.0, 3.0, math.inf])
def test_innovation_calibration_target(nu):
    # the defining property: P(|eps| <= 1) = 2*Phi(1) - 1 for every nu
    rng = np.random.default_rng(314159)
    eps = draw_innovations(1_000_000, InnovationSpec(nu), rng)
    want = 2.0 * PHI_AT_ONE - 1.0
    assert abs(np.mean(np.abs(eps) <= 1.0) - want) < 0.002


def test_ar1_zero_phi_returns_innovations():
    got = ar1_generate(50, 0.0, InnovationSpec(math.inf), burn_in=0, seed=11)
    want = np.random.default_rng(11).standard_normal(50)
    assert np.array_equal(got, want)


def test_ar1_recursion_identity_bitwise():
    n, burn, phi = 300, 40, 0.8
    got = ar1_generate(n, phi, InnovationSpec(3.0), burn_in=burn, seed=21)
    eps = draw_innovations(burn + n, InnovationSpec(3.0), np.random.default_rng(21))
    # reconstruct the recursion including the burn-in stretch
    x = np.empty(burn + n)
    acc = 0.0
    for t in range(burn + n):
        acc = phi * acc + eps[t]
        x[t] = acc
    assert np.array_equal(got, x[burn:])


def test_ar1_burn_in_semantics():
    full = ar1_generate(100, 0.5, InnovationSpec(math.inf), burn_in=0, seed=3)
    trimmed = ar1_generate(60, 0.5, InnovationSpec(math.inf), burn_in=40, seed=3)
    assert np.array_equal(trimmed, full[40:])


def test_ar1_validation():
    with pytest.raises(ValueError):
        ar1_generate(0, 0.5, InnovationSpec(2.0))
    with pytest.raises(ValueError):
        ar1_generate(10, 1.0, InnovationSpec(2.0))
    with pytest.raises(ValueError):
        ar1_generate(10, 0.5, InnovationSpec(2.0), burn_in=-1)


def test_inject_shift_worked_example():
    got = inject_shift([0.0, 0.0, 0.0, 0.0], 1.0, 0.5)
    assert np.array_equal(got, [0.0, 0.0, 1.0, 1.0])


def test_inject_shift_floor_split():
    got = inject_shift(np.zeros(5), 2.0, 0.5)  # floor(2.5) = 2 pre-shift points
    assert np.array_equal(got, [0.0, 0.0, 2.0, 2.0, 2.0])
    tiny = inject_shift(np.zeros(3), 1.0, 0.1)  # floor(0.3) = 0: all shifted
    assert np.array_equal(tiny, [1.0, 1.0, 1.0])
    late = inject_shift(np.zeros(4), 1.0, 0.999)  # floor(3.996) = 3
    assert np.array_equal(late, [0.0, 0.0, 0.0, 1.0])
    with pytest.raises(ValueError):
        inject_shift(np.zeros(4), 1.0, 0.0)
    with pytest.raises(ValueError):
        inject_shift(np.zeros(4), 1.0, 1.0)


def test_inject_shift_leaves_input_untouched():
    x = np.zeros(6)
    inject_shift(x, 5.0, 0.5)
    assert np.array_equal(x, np.zeros(6))


def test_sim_config_validation():
    cfg = SimConfig(n=200, phi=0.4, nu=3.0)
    assert cfg.shift_height == 0.0 and cfg.burn_in == 200
    with pytest.raises(ValueError):
        SimConfig(n=1, phi=0.0, nu=2.0)
    with pytest.raises(ValueError):
        SimConfig(n=50, phi=1.0, nu=2.0)
    with pytest.raises(ValueError):
        SimConfig(n=50, phi=0.0, nu=0.0)
    with pytest.raises(ValueError):
        SimConfig(n=50, phi=0.0, nu=2.0, shift_position=1.0)
    with pytest.raises(ValueError):
        SimConfig(n=50, phi=0.0, nu=2.0, burn_in=-5)


def test_simulate_deterministic_and_shifted():
    cfg = SimConfig(n=120, phi=0.4, nu=3.0, shift_height=2.0, shift_position=0.5)
    a = simulate(cfg, seed=77)
    b = simulate(cfg, seed=77)
    assert np.array_equal(a.values, b.values)
    base = simulate(SimConfig(n=120, phi=0.4, nu=3.0), seed=77)
    assert np.array_equal(a.values[:60], base.values[:60])  # pre-shift untouched
    np.testing.assert_allclose(a.values[60:] - base.values[60:], 2.0, rtol=1e-12)


def test_simulate_zero_height_is_pure_noise():
    cfg = SimConfig(n=80, phi=0.8, nu=math.inf, shift_height=0.0, shift_position=0.25)
    noise = ar1_generate(80, 0.8, InnovationSpec(math.inf), burn_in=200, seed=9)
    assert np.array_equal(simulate(cfg, seed=9).values, noise)
