"""Monte Carlo study harness: size tables, power curves, rate diagnostics.

Replications are driven by per-replication seed streams derived from
(master seed, cell, replication index), so results are byte-identical
for any worker count and the zero-height power run reproduces the size
run. Aggregation sticks to integer counters for the same reason.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Dict, Iterable, Optional, Sequence, Tuple

import numpy as np
from scipy.special import ndtri

from . import _backend
from .detectors import (
    _cusum_scale,
    _hle_scale,
    _wmw_scale,
    cusum_profile,
    hle_weighted_profile,
    wmw_profile,
)
from .nuisance import (
    DegenerateNuisanceError,
    adaptive_block_length,
    default_bandwidth,
    fixed_block_length,
    lag1_autocorr,
    block_variance_sigma,
    subsample_sigma,
    u_hat_zero,
)
from .simgen import InnovationSpec, ar1_generate, inject_shift
from .ustat import empirical_cdf_values, order_index

JOBS_ENV_VAR = "HLSHIFT_JOBS"
DEFAULT_CRITICAL_VALUE = 1.36
TEST_ORDER = ("cusum", "wmw", "hle")
CSV_HEADER = (
    "phi",
    "nu",
    "policy",
    "test",
    "height",
    "n",
    "reps",
    "rejection_rate",
    "mean_block_length",
    "seed",
)

_POLICIES = ("fixed", "adaptive")


def _check_phi(phi: float) -> float:
    phi = float(phi)
    if not abs(phi) < 1:
        raise ValueError(f"AR coefficient must lie in (-1, 1), got {phi!r}")
    return phi


def _check_nu(nu: float) -> float:
    InnovationSpec(nu)
    return float(nu)


def _check_policies(policies: Sequence[str]) -> Tuple[str, ...]:
    pols = tuple(str(p) for p in policies)
    if not pols:
        raise ValueError("need at least one block policy")
    for p in pols:
        if p not in _POLICIES:
            raise ValueError(f"unknown block policy {p!r}; expected one of {_POLICIES}")
    if len(set(pols)) != len(pols):
        raise ValueError("duplicate block policies")
    return pols


@dataclass(frozen=True)
class SizeExperimentConfig:
    """Null-rejection study over a (phi, nu) x policy grid."""

    n: int
    phis: Tuple[float, ...]
    nus: Tuple[float, ...]
    policies: Tuple[str, ...] = _POLICIES
    replications: int = 4000
    burn_in: int = 200
    critical_value: float = DEFAULT_CRITICAL_VALUE

    def __post_init__(self):
        object.__setattr__(self, "n", int(self.n))
        if self.n < 8:
            raise ValueError("size study needs n >= 8")
        object.__setattr__(self, "phis", tuple(_check_phi(p) for p in self.phis))
        object.__setattr__(self, "nus", tuple(_check_nu(v) for v in self.nus))
        object.__setattr__(self, "policies", _check_policies(self.policies))
        object.__setattr__(self, "replications", int(self.replications))
        if self.replications < 1:
            raise ValueError("need at least one replication")
        object.__setattr__(self, "burn_in", int(self.burn_in))
        if self.burn_in < 0:
            raise ValueError("burn-in cannot be negative")
        object.__setattr__(self, "critical_value", float(self.critical_value))
        if not self.critical_value > 0:
            raise ValueError("critical value must be positive")


@dataclass(frozen=True)
class PowerExperimentConfig:
    """Rejection-rate curve over shift heights for one (phi, nu, policy) cell."""

    n: int
    phi: float
    nu: float
    policy: str
    heights: Tuple[float, ...]
    shift_position: float = 0.5
    replications: int = 400
    burn_in: int = 200
    critical_value: float = DEFAULT_CRITICAL_VALUE

    def __post_init__(self):
        object.__setattr__(self, "n", int(self.n))
        if self.n < 8:
            raise ValueError("power study needs n >= 8")
        object.__setattr__(self, "phi", _check_phi(self.phi))
        object.__setattr__(self, "nu", _check_nu(self.nu))
        (policy,) = _check_policies((self.policy,))
        object.__setattr__(self, "policy", policy)
        heights = tuple(float(h) for h in self.heights)
        if not heights:
            raise ValueError("need at least one shift height")
        if any(b <= a for a, b in zip(heights, heights[1:])):
            raise ValueError("shift heights must be strictly increasing")
        object.__setattr__(self, "heights", heights)
        if not 0.0 < float(self.shift_position) < 1.0:
            raise ValueError("shift position must lie strictly inside (0, 1)")
        object.__setattr__(self, "shift_position", float(self.shift_position))
        object.__setattr__(self, "replications", int(self.replications))
        if self.replications < 1:
            raise ValueError("need at least one replication")
        object.__setattr__(self, "burn_in", int(self.burn_in))
        if self.burn_in < 0:
            raise ValueError("burn-in cannot be negative")
        object.__setattr__(self, "critical_value", float(self.critical_value))
        if not self.critical_value > 0:
            raise ValueError("critical value must be positive")


@dataclass(frozen=True)
class SizeRow:
    phi: float
    nu: float
    policy: str
    test: str
    rejection_rate: float
    mean_block_length: float
    degenerate: int


@dataclass(frozen=True)
class SizeTable:
    n: int
    replications: int
    seed: int
    critical_value: float
    rows: Tuple[SizeRow, ...]

    def rate(self, phi: float, nu: float, policy: str, test: str) -> float:
        for row in self.rows:
            if (
                row.policy == policy
                and row.test == test
                and math.isclose(row.phi, phi)
                and (math.isclose(row.nu, nu) if math.isfinite(nu) else math.isinf(row.nu))
            ):
                return row.rejection_rate
        raise KeyError(f"no row for phi={phi}, nu={nu}, policy={policy}, test={test}")

    def percentage(self, phi: float, nu: float, policy: str, test: str) -> float:
        """Rejection rate as a percentage in [0, 100] (size tables are quoted so)."""
        return 100.0 * self.rate(phi, nu, policy, test)

    def to_csv_rows(self):
        for row in self.rows:
            yield {
                "phi": _grid_str(row.phi),
                "nu": _grid_str(row.nu),
                "policy": row.policy,
                "test": row.test,
                "height": "0",
                "n": str(self.n),
                "reps": str(self.replications),
                "rejection_rate": str(row.rejection_rate),
                "mean_block_length": str(row.mean_block_length),
                "seed": str(self.seed),
            }


@dataclass(frozen=True)
class PowerCurve:
    n: int
    phi: float
    nu: float
    policy: str
    shift_position: float
    replications: int
    seed: int
    critical_value: float
    heights: Tuple[float, ...]
    rates: Dict[str, Tuple[float, ...]]
    mean_block_lengths: Tuple[float, ...]
    degenerate: Tuple[int, ...]

    def rate_series(self, test: str) -> Tuple[float, ...]:
        return self.rates[test]

    def to_csv_rows(self):
        for hi, height in enumerate(self.heights):
            for test in TEST_ORDER:
                yield {
                    "phi": _grid_str(self.phi),
                    "nu": _grid_str(self.nu),
                    "policy": self.policy,
                    "test": test,
                    "height": _grid_str(height),
                    "n": str(self.n),
                    "reps": str(self.replications),
                    "rejection_rate": str(self.rates[test][hi]),
                    "mean_block_length": str(self.mean_block_lengths[hi]),
                    "seed": str(self.seed),
                }


def _grid_str(value: float) -> str:
    if math.isinf(value):
        return "inf"
    return format(float(value), "g")


def resolve_jobs(jobs: Optional[int] = None) -> int:
    """Worker count: explicit arg, else the HLSHIFT_JOBS env var, else CPUs."""
    if jobs is None:
        env = os.environ.get(JOBS_ENV_VAR)
        if env is not None:
            try:
                jobs = int(env)
            except ValueError:
                raise ValueError(f"{JOBS_ENV_VAR} must be an integer, got {env!r}") from None
        else:
            jobs = os.cpu_count() or 1
    jobs = int(jobs)
    if jobs < 1:
        raise ValueError(f"worker count must be at least 1, got {jobs}")
    return jobs


def _stream_seed(master_seed: int, *parts) -> np.random.SeedSequence:
    """Replication-level seed stream keyed by (master seed, cell labels, rep)."""
    key = "|".join(repr(float(p)) if isinstance(p, float) else repr(p) for p in parts)
    digest = hashlib.blake2b(key.encode("ascii"), digest_size=16).digest()
    words = tuple(int.from_bytes(digest[i : i + 4], "little") for i in (0, 4, 8, 12))
    return np.random.SeedSequence(entropy=(int(master_seed),) + words)


def _check_seed(seed: int) -> int:
    seed = int(seed)
    if seed < 0:
        raise ValueError("master seed must be a nonnegative integer")
    return seed


def _evaluate_statistics(v: np.ndarray, policies: Sequence[str]):
    """Studentized statistics for all three tests under each block policy.

    Returns {policy: (stats_by_test_order, block_length, degenerate)}.
    Shares one profile computation across policies; the statistic values
    match detectors.run_test bitwise.
    """
    n = v.shape[0]
    cdf_vals = empirical_cdf_values(v)
    rank_resid = cdf_vals - 0.5
    raw_resid = v - v.mean()
    cus = cusum_profile(v).max_abs
    wmw = wmw_profile(v).max_abs
    hle = hle_weighted_profile(v).max_abs
    try:
        u0 = u_hat_zero(v, default_bandwidth(v))
    except (ValueError, DegenerateNuisanceError):
        u0 = 0.0
    out = {}
    for policy in policies:
        if policy == "fixed":
            l = fixed_block_length(n)
        else:
            try:
                l = adaptive_block_length(n, lag1_autocorr(cdf_vals))
            except DegenerateNuisanceError:
                out[policy] = ((math.nan,) * 3, 1, True)
                continue
        sig_rank = subsample_sigma(rank_resid, l)
        sig_raw = block_variance_sigma(raw_resid, l)
        if not (sig_rank > 0 and sig_raw > 0 and u0 > 0):
            out[policy] = ((math.nan,) * 3, l, True)
            continue
        stats = (
            cus * _cusum_scale(n, sig_raw),
            wmw * _wmw_scale(n, sig_rank),
            hle * _hle_scale(n, sig_rank, u0),
        )
        out[policy] = (stats, l, False)
    return out


def _size_chunk(args):
    config, seed, phi, nu, rep_lo, rep_hi = args
    n_pol = len(config.policies)
    rej = np.zeros((n_pol, 3), dtype=np.int64)
    lsum = np.zeros(n_pol, dtype=np.int64)
    degen = np.zeros(n_pol, dtype=np.int64)
    spec = InnovationSpec(nu)
    for rep in range(rep_lo, rep_hi):
        ss = _stream_seed(seed, phi, nu, rep)
        v = ar1_generate(config.n, phi, spec, config.burn_in, ss)
        evaluated = _evaluate_statistics(v, config.policies)
        for pi, policy in enumerate(config.policies):
            stats, l, bad = evaluated[policy]
            lsum[pi] += l
            if bad:
                degen[pi] += 1
                continue
            for ti in range(3):
                if stats[ti] > config.critical_value:
                    rej[pi, ti] += 1
    return rej, lsum, degen


def _power_chunk(args):
    config, seed, rep_lo, rep_hi = args
    n_h = len(config.heights)
    rej = np.zeros((n_h, 3), dtype=np.int64)
    lsum = np.zeros(n_h, dtype=np.int64)
    degen = np.zeros(n_h, dtype=np.int64)
    spec = InnovationSpec(config.nu)
    for rep in range(rep_lo, rep_hi):
        ss = _stream_seed(seed, config.phi, config.nu, rep)
        base = ar1_generate(config.n, config.phi, spec, config.burn_in, ss)
        for hi, height in enumerate(config.heights):
            v = base if height == 0.0 else inject_shift(base, height, config.shift_position)
            evaluated = _evaluate_statistics(v, (config.policy,))
            stats, l, bad = evaluated[config.policy]
            lsum[hi] += l
            if bad:
                degen[hi] += 1
                continue
            for ti in range(3):
                if stats[ti] > config.critical_value:
                    rej[hi, ti] += 1
    return rej, lsum, degen


def _chunk_ranges(total: int, jobs: int):
    """Split range(total) into at most 8*jobs contiguous chunks."""
    n_chunks = min(total, max(1, 8 * jobs))
    base, extra = divmod(total, n_chunks)
    lo = 0
    for i in range(n_chunks):
        hi = lo + base + (1 if i < extra else 0)
        yield lo, hi
        lo = hi


def _run_chunks(worker, tasks, jobs: int):
    if jobs == 1:
        for task in tasks:
            yield worker(task)
        return
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        yield from pool.map(worker, tasks)


def run_size_experiment(config: SizeExperimentConfig, seed: int, jobs: Optional[int] = None) -> SizeTable:
    """Null rejection rates at the fixed critical value for every grid cell."""
    seed = _check_seed(seed)
    jobs = resolve_jobs(jobs)
    rows = []
    for phi in config.phis:
        for nu in config.nus:
            tasks = [
                (config, seed, phi, nu, lo, hi)
                for lo, hi in _chunk_ranges(config.replications, jobs)
            ]
            rej = np.zeros((len(config.policies), 3), dtype=np.int64)
            lsum = np.zeros(len(config.policies), dtype=np.int64)
            degen = np.zeros(len(config.policies), dtype=np.int64)
            for c_rej, c_lsum, c_degen in _run_chunks(_size_chunk, tasks, jobs):
                rej += c_rej
                lsum += c_lsum
                degen += c_degen
            for pi, policy in enumerate(config.policies):
                for ti, test in enumerate(TEST_ORDER):
                    rows.append(
                        SizeRow(
                            phi=phi,
                            nu=nu,
                            policy=policy,
                            test=test,
                            rejection_rate=int(rej[pi, ti]) / config.replications,
                            mean_block_length=int(lsum[pi]) / config.replications,
                            degenerate=int(degen[pi]),
                        )
                    )
    return SizeTable(
        n=config.n,
        replications=config.replications,
        seed=seed,
        critical_value=config.critical_value,
        rows=tuple(rows),
    )


def run_power_experiment(config: PowerExperimentConfig, seed: int, jobs: Optional[int] = None) -> PowerCurve:
    """Rejection-rate curve over the height grid for one cell.

    Replication seed streams ignore the height, so all heights share the
    same noise paths and the zero-height column reproduces the size run.
    """
    seed = _check_seed(seed)
    jobs = resolve_jobs(jobs)
    tasks = [(config, seed, lo, hi) for lo, hi in _chunk_ranges(config.replications, jobs)]
    rej = np.zeros((len(config.heights), 3), dtype=np.int64)
    lsum = np.zeros(len(config.heights), dtype=np.int64)
    degen = np.zeros(len(config.heights), dtype=np.int64)
    for c_rej, c_lsum, c_degen in _run_chunks(_power_chunk, tasks, jobs):
        rej += c_rej
        lsum += c_lsum
        degen += c_degen
    rates = {
        test: tuple(int(rej[hi, ti]) / config.replications for hi in range(len(config.heights)))
        for ti, test in enumerate(TEST_ORDER)
    }
    return PowerCurve(
        n=config.n,
        phi=config.phi,
        nu=config.nu,
        policy=config.policy,
        shift_position=config.shift_position,
        replications=config.replications,
        seed=seed,
        critical_value=config.critical_value,
        heights=config.heights,
        rates=rates,
        mean_block_lengths=tuple(int(lsum[hi]) / config.replications for hi in range(len(config.heights))),
        degenerate=tuple(int(d) for d in degen),
    )


def default_height_grid(phi: float) -> Tuple[float, ...]:
    """Ten equally spaced shift heights, wider for stronger dependence."""
    phi = _check_phi(phi)
    if phi < 0.2:
        step = 0.1
    elif phi < 0.6:
        step = 0.2
    else:
        step = 0.4
    return tuple(step * i for i in range(1, 11))


def table_one_config(replications: int = 4000, n: int = 200) -> SizeExperimentConfig:
    """The headline size study grid: phi in {0, .4, .8} x nu in {inf, 3, 2}."""
    return SizeExperimentConfig(
        n=n,
        phis=(0.0, 0.4, 0.8),
        nus=(math.inf, 3.0, 2.0),
        policies=_POLICIES,
        replications=replications,
    )


def _bahadur_chunk(args):
    n, p, t0, u0, seed, rep_lo, rep_hi = args
    oi = np.empty(n - 1, dtype=np.int64)
    for i, k in enumerate(range(1, n)):
        oi[i] = order_index(p, k * (n - k))
    k = np.arange(1, n, dtype=np.int64)
    m = (k * (n - k)).astype(np.float64)
    w = m / float(n * n)
    sups = np.empty(rep_hi - rep_lo, dtype=np.float64)
    for rep in range(rep_lo, rep_hi):
        rng = np.random.default_rng(_stream_seed(seed, "bahadur", n, p, rep))
        x = rng.standard_normal(n)
        q, cnt = _backend.quantile_count_profile(x, oi, t0)
        remainder = (q - t0) + (cnt / m - p) / u0
        sups[rep - rep_lo] = float(np.max(w * np.abs(remainder)))
    return sups


def bahadur_diagnostic(
    n_grid: Sequence[int] = (100, 200, 400, 800),
    p: float = 0.5,
    replications: int = 200,
    seed: int = 0,
    jobs: Optional[int] = None,
):
    """Weighted sup-norm of the U-quantile linearization remainder.

    For i.i.d. standard normal data the split U-quantile at level p
    should track its first-order expansion; this returns, for each n,
    the median over replications of

        sup_k (k(n-k)/n^2) |(Q_k(p) - t_p) + (U_k(t_p) - p) / u(t_p)|

    with t_p and u(t_p) the exact difference-distribution quantile and
    density (the differences are N(0, 2)). The medians should shrink as
    n grows; the expected rate is roughly n^(-3/4) up to logs.
    Returns a list of {"n": n, "median_sup_remainder": value} rows.
    """
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    seed = _check_seed(seed)
    jobs = resolve_jobs(jobs)
    replications = int(replications)
    if replications < 1:
        raise ValueError("need at least one replication")
    t0 = math.sqrt(2.0) * float(ndtri(p))
    u0 = math.exp(-t0 * t0 / 4.0) / (2.0 * math.sqrt(math.pi))
    rows = []
    for n in n_grid:
        n = int(n)
        if n < 4:
            raise ValueError("diagnostic needs n >= 4")
        tasks = [(n, p, t0, u0, seed, lo, hi) for lo, hi in _chunk_ranges(replications, jobs)]
        sups = np.concatenate(list(_run_chunks(_bahadur_chunk, tasks, jobs)))
        rows.append({"n": n, "median_sup_remainder": float(np.median(sups))})
    return rows


def write_results_csv(rows: Iterable[dict], path_or_file) -> None:
    """Emit study rows with the pinned header, newline-stable."""

    def _write(fh):
        writer = csv.DictWriter(fh, fieldnames=CSV_HEADER, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)

    if hasattr(path_or_file, "write"):
        _write(path_or_file)
    else:
        with open(path_or_file, "w", encoding="ascii", newline="") as fh:
            _write(fh)


def results_csv_text(results) -> str:
    """CSV text for one result object or a list of them."""
    if not isinstance(results, (list, tuple)):
        results = [results]
    buf = io.StringIO()
    rows = []
    for res in results:
        rows.extend(res.to_csv_rows())
    write_results_csv(rows, buf)
    return buf.getvalue()


_CONFIG_COMMON_KEYS = {"mode", "n", "replications", "seed", "burn_in", "critical_value", "phis", "nus", "policies"}
_CONFIG_POWER_KEYS = {"heights", "shift_position"}


def _parse_nu_value(raw) -> float:
    if isinstance(raw, str):
        if raw.lower() in ("inf", "infinity"):
            return math.inf
        raise ValueError(f"nu entries must be numbers or 'inf', got {raw!r}")
    return float(raw)


def load_study_config(path: str) -> dict:
    """Read a study config document from JSON (or TOML on Python >= 3.11)."""
    if path.endswith(".toml"):
        try:
            import tomllib
        except ImportError:
            raise ValueError(
                "TOML configs need Python >= 3.11 (tomllib); use a JSON config here"
            ) from None
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def parse_study_config(doc: dict):
    """Validate a config document; returns ("size"|"power", plan dict).

    A size plan holds one SizeExperimentConfig; a power plan holds one
    PowerExperimentConfig per (phi, nu, policy) grid cell.
    """
    if not isinstance(doc, dict):
        raise ValueError("config document must be a JSON object")
    mode = doc.get("mode")
    if mode not in ("size", "power"):
        raise ValueError(f"config mode must be 'size' or 'power', got {mode!r}")
    allowed = _CONFIG_COMMON_KEYS | (_CONFIG_POWER_KEYS if mode == "power" else set())
    unknown = sorted(set(doc) - allowed)
    if unknown:
        raise ValueError(f"unknown config keys for mode {mode!r}: {', '.join(unknown)}")
    missing = sorted(k for k in ("n", "replications", "seed") if k not in doc)
    if missing:
        raise ValueError(f"config is missing required keys: {', '.join(missing)}")
    seed = _check_seed(doc["seed"])
    phis = tuple(float(p) for p in doc.get("phis", (0.0,)))
    nus = tuple(_parse_nu_value(v) for v in doc.get("nus", ("inf",)))
    policies = tuple(doc.get("policies", _POLICIES))
    common = dict(
        n=int(doc["n"]),
        replications=int(doc["replications"]),
        burn_in=int(doc.get("burn_in", 200)),
        critical_value=float(doc.get("critical_value", DEFAULT_CRITICAL_VALUE)),
    )
    if mode == "size":
        config = SizeExperimentConfig(phis=phis, nus=nus, policies=policies, **common)
        return "size", {"config": config, "seed": seed}
    shift_position = float(doc.get("shift_position", 0.5))
    heights = doc.get("heights")
    cells = []
    for phi in phis:
        grid = tuple(float(h) for h in heights) if heights is not None else default_height_grid(phi)
        for nu in nus:
            for policy in policies:
                cells.append(
                    PowerExperimentConfig(
                        phi=phi,
                        nu=nu,
                        policy=policy,
                        heights=grid,
                        shift_position=shift_position,
                        **common,
                    )
                )
    return "power", {"configs": cells, "seed": seed}
