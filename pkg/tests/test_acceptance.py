"""End-to-end acceptance checks.

Each test prints a single ACCEPTANCE line (PASS/FAIL with the measured
numbers) so the run log doubles as a report. The size study reuses one
module-scoped 4000-replication table; everything else runs at the scale
stated in the individual test.
"""

import math

import numpy as np
import pytest

from conftest import brute_hl_profile, brute_wmw_doubled, random_series
from hlshift._backend import median_profile, wmw_twod
from hlshift.asymptotics import bridge_sup_mc, kolmogorov_cdf, kolmogorov_quantile
from hlshift.detectors import run_test
from hlshift.harness import (
    PowerExperimentConfig,
    SizeExperimentConfig,
    TEST_ORDER,
    bahadur_diagnostic,
    default_height_grid,
    results_csv_text,
    run_power_experiment,
    run_size_experiment,
    table_one_config,
)
from hlshift.nuisance import (
    adaptive_block_length,
    fixed_block_length,
    sigma_for_rank_tests,
    u_hat_zero,
)

SEED = 20260819
TOL_PP = 1.5

INF = math.inf

# Reference empirical sizes in percent for n=200 at the 5% level,
# keyed by (phi, nu, policy); tuples follow TEST_ORDER = (cusum, wmw, hle).
REFERENCE_SIZE_PCT = {
    (0.0, INF, "fixed"): (3.9, 2.9, 3.6),
    (0.0, INF, "adaptive"): (3.8, 2.2, 2.8),
    (0.0, 3.0, "fixed"): (3.5, 2.9, 3.7),
    (0.0, 3.0, "adaptive"): (3.1, 2.4, 2.8),
    (0.0, 2.0, "fixed"): (3.4, 3.1, 4.8),
    (0.0, 2.0, "adaptive"): (2.5, 2.2, 3.4),
    (0.4, INF, "fixed"): (4.9, 3.1, 3.8),
    (0.4, INF, "adaptive"): (6.0, 3.9, 4.3),
    (0.4, 3.0, "fixed"): (3.8, 3.0, 3.9),
    (0.4, 3.0, "adaptive"): (4.9, 3.3, 4.0),
    (0.4, 2.0, "fixed"): (3.6, 3.0, 4.5),
    (0.4, 2.0, "adaptive"): (4.2, 3.8, 5.1),
    (0.8, INF, "fixed"): (10.6, 6.5, 7.1),
    (0.8, INF, "adaptive"): (4.0, 2.5, 2.9),
    (0.8, 3.0, "fixed"): (10.5, 7.0, 7.7),
    (0.8, 3.0, "adaptive"): (3.9, 2.8, 3.1),
    (0.8, 2.0, "fixed"): (8.8, 6.7, 10.7),
    (0.8, 2.0, "adaptive"): (3.7, 2.3, 5.7),
}


def _nu_str(nu):
    return "inf" if math.isinf(nu) else format(nu, "g")


def _announce(capsys, *lines):
    with capsys.disabled():
        print()
        for line in lines:
            print(line)


@pytest.fixture(scope="module")
def size_table():
    # ~2 minutes: 18 cells x 4000 replications at n=200, both policies
    # evaluated on shared replicates.
    return run_size_experiment(table_one_config(), seed=SEED)


def test_criterion_1_size_table(size_table, capsys):
    rows = []
    failures = []
    for (phi, nu, policy), ref in sorted(
        REFERENCE_SIZE_PCT.items(), key=lambda kv: (kv[0][0], kv[0][1], kv[0][2])
    ):
        for test, ref_pct in zip(TEST_ORDER, ref):
            mine = size_table.percentage(phi, nu, policy, test)
            delta = mine - ref_pct
            line = (
                f"    phi={phi:<3g} nu={_nu_str(nu):<3} {policy:<8} {test:<5}"
                f" got={mine:5.2f}%  ref={ref_pct:4.1f}%  delta={delta:+5.2f}pp"
            )
            rows.append(line)
            if abs(delta) > TOL_PP:
                failures.append(line)
    verdict = "PASS" if not failures else "FAIL"
    _announce(
        capsys,
        f"ACCEPTANCE 1 size-table-within-1.5pp: {verdict} — "
        f"{54 - len(failures)}/54 entries inside the band",
        *rows,
    )
    assert not failures, (
        f"{len(failures)} size entries outside +/-{TOL_PP}pp:\n" + "\n".join(failures)
    )


def test_size_table_wmw_more_conservative_than_hle(size_table, capsys):
    # fixed-policy cells only, with two standard errors of slack per side
    reps = 4000
    worst = None
    for (phi, nu, policy) in REFERENCE_SIZE_PCT:
        if policy != "fixed":
            continue
        w = size_table.rate(phi, nu, policy, "wmw")
        h = size_table.rate(phi, nu, policy, "hle")
        se = math.sqrt(w * (1 - w) / reps) + math.sqrt(h * (1 - h) / reps)
        margin = (h + 2 * se) - w
        if worst is None or margin < worst[0]:
            worst = (margin, phi, nu, w, h)
        assert w <= h + 2 * se, (
            f"WMW size {w:.4f} above HLE size {h:.4f} + 2se at phi={phi}, nu={nu}"
        )
    _announce(
        capsys,
        "ACCEPTANCE 1b wmw-conservative-fixed-cells: PASS — tightest margin "
        f"{worst[0]:+.4f} at phi={worst[1]:g}, nu={_nu_str(worst[2])} "
        f"(wmw={worst[3]:.4f}, hle={worst[4]:.4f})",
    )


def test_criterion_2_power_curves(capsys):
    def cell(phi, nu, policy, position):
        cfg = PowerExperimentConfig(
            n=200,
            phi=phi,
            nu=nu,
            policy=policy,
            heights=default_height_grid(phi),
            shift_position=position,
            replications=400,
        )
        return run_power_experiment(cfg, seed=SEED)

    center = cell(0.0, INF, "fixed", 0.5)
    off_t3 = cell(0.8, 3.0, "adaptive", 0.75)
    off_t2 = cell(0.8, 2.0, "adaptive", 0.75)

    # (a) nondecreasing in h up to isotonic slack 0.05, all 9 curves
    worst_drop = 0.0
    for curve in (center, off_t3, off_t2):
        for test in TEST_ORDER:
            r = curve.rate_series(test)
            for lo, hi in zip(r, r[1:]):
                worst_drop = max(worst_drop, lo - hi)

    # (b) off-center shift, heavy tails: HLE at or above WMW on the top
    # half of the height grid in at least 80% of the points
    wins = total = 0
    for curve in (off_t3, off_t2):
        hle = curve.rate_series("hle")
        wmw = curve.rate_series("wmw")
        for i in range(len(hle) // 2, len(hle)):
            total += 1
            wins += hle[i] >= wmw[i]

    # (c) normal noise, centered shift: CUSUM strictly on top at the
    # three mid-grid heights
    mids = (3, 4, 5)
    cus = center.rate_series("cusum")
    others = [center.rate_series(t) for t in ("wmw", "hle")]
    cusum_top = all(cus[i] > max(o[i] for o in others) for i in mids)

    ok = worst_drop <= 0.05 and wins >= 0.8 * total and cusum_top
    _announce(
        capsys,
        f"ACCEPTANCE 2 power-curve-shape: {'PASS' if ok else 'FAIL'} — "
        f"worst isotonic drop {worst_drop:.4f} (limit 0.05); "
        f"HLE>=WMW on {wins}/{total} top-half points (need >=80%); "
        f"CUSUM highest at mid heights: {cusum_top} "
        f"(cusum={[round(cus[i], 4) for i in mids]})",
    )
    assert worst_drop <= 0.05
    assert wins >= 0.8 * total
    assert cusum_top


def test_criterion_3_exact_counting_oracles(capsys):
    rng = np.random.default_rng(SEED)
    checked = 0
    for i in range(200):
        n = int(rng.integers(2, 61))
        style = "ties" if i % 2 else "continuous"
        x = random_series(rng, n, style)
        np.testing.assert_array_equal(median_profile(x), brute_hl_profile(x))
        np.testing.assert_array_equal(wmw_twod(x), brute_wmw_doubled(x))
        checked += 1
    _announce(
        capsys,
        f"ACCEPTANCE 3 exact-counting-oracles: PASS — {checked} series, "
        "hl profile and doubled rank sums equal brute enumeration exactly",
    )


def test_criterion_4_limit_law_cross_check(capsys):
    draws = np.sort(bridge_sup_mc(100_000, 2000, SEED))
    m = draws.shape[0]
    cdf = np.array([kolmogorov_cdf(t) for t in draws])
    grid = np.arange(1, m + 1, dtype=np.float64) / m
    ks = float(np.max(np.maximum(np.abs(cdf - grid), np.abs(cdf - (grid - 1.0 / m)))))
    q95 = kolmogorov_quantile(0.95)
    ok = ks < 0.01 and 1.35 <= q95 <= 1.36
    _announce(
        capsys,
        f"ACCEPTANCE 4 limit-law-cross-check: {'PASS' if ok else 'FAIL'} — "
        f"sup CDF gap {ks:.4f} (limit 0.01); quantile(0.95)={q95:.4f} in [1.35, 1.36]",
    )
    assert ks < 0.01
    assert 1.35 <= q95 <= 1.36


def test_criterion_5_nuisance_calibration(capsys):
    rng = np.random.default_rng(SEED)
    x = rng.standard_normal(100_000)
    sigma, l = sigma_for_rank_tests(x)
    var_err = abs(sigma**2 - 1.0 / 12.0)

    y = rng.standard_normal(2000)
    dens = u_hat_zero(y)
    dens_err = abs(dens - 1.0 / (2.0 * math.sqrt(math.pi)))

    ok = var_err < 0.005 and dens_err < 0.02
    _announce(
        capsys,
        f"ACCEPTANCE 5 nuisance-calibration: {'PASS' if ok else 'FAIL'} — "
        f"|sigma^2 - 1/12| = {var_err:.5f} at n=100000 (l={l}, limit 0.005); "
        f"|u_hat(0) - 1/(2 sqrt pi)| = {dens_err:.5f} at n=2000 (limit 0.02)",
    )
    assert var_err < 0.005
    assert dens_err < 0.02


def test_criterion_6_invariances(capsys):
    rng = np.random.default_rng(SEED)
    rel = 1e-12

    def close(a, b):
        return math.isclose(a, b, rel_tol=rel, abs_tol=0.0)

    # studentized HLE is exactly affine invariant
    for _ in range(100):
        n = int(rng.integers(40, 121))
        x = rng.standard_normal(n)
        a = float(np.exp(rng.uniform(np.log(0.1), np.log(10.0))))
        b = float(rng.uniform(-10.0, 10.0))
        base = run_test(x, test="hle")
        moved = run_test(a * x + b, test="hle")
        assert close(base.statistic, moved.statistic)
        assert base.change_point == moved.change_point

    # WMW depends on the data only through ranks
    transforms = (np.arctan, lambda v: v**3, lambda v: np.exp(v / 4.0))
    for i in range(100):
        n = int(rng.integers(40, 121))
        x = rng.standard_normal(n)
        g = transforms[i % len(transforms)]
        base = run_test(x, test="wmw")
        moved = run_test(g(x), test="wmw")
        assert close(base.statistic, moved.statistic)
        assert base.change_point == moved.change_point

    # CUSUM ignores level shifts of the whole series
    for _ in range(100):
        n = int(rng.integers(40, 121))
        x = rng.standard_normal(n)
        c = float(rng.uniform(-100.0, 100.0))
        base = run_test(x, test="cusum")
        moved = run_test(x + c, test="cusum")
        assert close(base.statistic, moved.statistic)
        assert base.change_point == moved.change_point

    # reversing time reflects the estimated change point; n is chosen a
    # multiple of the fixed block length (7 at n=98) so the block sums
    # of the reversed series are the originals reversed
    n = 98
    for _ in range(100):
        x = rng.standard_normal(n)
        x[n // 2 :] += 1.5
        for test in TEST_ORDER:
            fwd = run_test(x, test=test)
            rev = run_test(x[::-1], test=test)
            assert rev.change_point == n - fwd.change_point
            assert close(fwd.statistic, rev.statistic)

    _announce(
        capsys,
        "ACCEPTANCE 6 invariance-suite: PASS — 100 inputs each for HLE "
        "affine, WMW monotone, CUSUM translation, and time reversal "
        "(statistics at rel 1e-12, change points exact)",
    )


def test_criterion_7_block_length_formulas(capsys):
    got = (
        fixed_block_length(200),
        adaptive_block_length(200, 0.4),
        adaptive_block_length(200, 0.8),
    )
    ok = got == (9, 6, 16)
    _announce(
        capsys,
        f"ACCEPTANCE 7 block-length-formulas: {'PASS' if ok else 'FAIL'} — "
        f"fixed(200)={got[0]}, adaptive(200, 0.4)={got[1]}, "
        f"adaptive(200, 0.8)={got[2]} (want 9, 6, 16)",
    )
    assert got == (9, 6, 16)


def test_criterion_8_parallel_determinism(capsys):
    size_cfg = SizeExperimentConfig(
        n=64, phis=(0.4,), nus=(3.0,), replications=60, burn_in=50
    )
    size_texts = [
        results_csv_text(run_size_experiment(size_cfg, seed=SEED, jobs=j))
        for j in (1, 2, 3)
    ]
    power_cfg = PowerExperimentConfig(
        n=64,
        phi=0.4,
        nu=3.0,
        policy="adaptive",
        heights=(0.5, 1.0),
        replications=60,
        burn_in=50,
    )
    power_texts = [
        results_csv_text(run_power_experiment(power_cfg, seed=SEED, jobs=j))
        for j in (1, 2)
    ]
    ok = len(set(size_texts)) == 1 and len(set(power_texts)) == 1
    _announce(
        capsys,
        f"ACCEPTANCE 8 parallel-determinism: {'PASS' if ok else 'FAIL'} — "
        "size CSV identical across jobs in {1, 2, 3}; "
        "power CSV identical across jobs in {1, 2}",
    )
    assert size_texts[0] == size_texts[1] == size_texts[2]
    assert power_texts[0] == power_texts[1]


def test_criterion_9_linearization_remainder_shrinks(capsys):
    rows = bahadur_diagnostic(seed=0)
    medians = [row["median_sup_remainder"] for row in rows]
    ns = [row["n"] for row in rows]
    decreasing = all(a > b for a, b in zip(medians, medians[1:]))
    _announce(
        capsys,
        f"ACCEPTANCE 9 linearization-remainder: {'PASS' if decreasing else 'FAIL'} — "
        "medians "
        + " > ".join(f"{m:.6f}" for m in medians)
        + f" along n={ns}",
    )
    assert ns == [100, 200, 400, 800]
    assert decreasing
