"""Robust level-shift detection for dependent time series.

The headline test studentizes the maximal weighted two-sample
Hodges-Lehmann estimator over all splits of the series; CUSUM and
Wilcoxon-Mann-Whitney variants ship alongside it, together with the
nuisance estimation, the limiting distribution, simulation generators
and a Monte Carlo study harness.
"""

from ._backend import BACKEND
from .asymptotics import SeriesTolerance, bridge_sup_mc, kolmogorov_cdf, kolmogorov_quantile
from .detectors import (
    TestReport,
    cusum_profile,
    cusum_statistic,
    decide,
    hle_statistic,
    hle_weighted_profile,
    run_all_tests,
    run_test,
    wmw_profile,
    wmw_statistic,
)
from .harness import (
    PowerCurve,
    PowerExperimentConfig,
    SizeExperimentConfig,
    SizeTable,
    bahadur_diagnostic,
    default_height_grid,
    run_power_experiment,
    run_size_experiment,
    table_one_config,
    write_results_csv,
)
from .multiset import DiffMultiset
from .nuisance import (
    ADAPTIVE,
    FIXED,
    Bandwidth,
    BlockPolicy,
    DegenerateNuisanceError,
    adaptive_block_length,
    default_bandwidth,
    fixed_block_length,
    lag1_autocorr,
    sigma_for_rank_tests,
    block_variance_sigma,
    subsample_sigma,
    u_hat_zero,
)
from .simgen import InnovationSpec, SimConfig, ar1_generate, inject_shift, simulate, t_scale_factor
from .ustat import (
    DIFFERENCE_KERNEL,
    PairKernel,
    SplitProfile,
    TimeSeries,
    empirical_cdf_values,
    hl_median_profile,
    hl_split_median,
    u_process_at,
    u_quantile_at,
)

__version__ = "0.1.0"

__all__ = [
    "ADAPTIVE",
    "BACKEND",
    "Bandwidth",
    "BlockPolicy",
    "DIFFERENCE_KERNEL",
    "DegenerateNuisanceError",
    "DiffMultiset",
    "InnovationSpec",
    "PairKernel",
    "PowerCurve",
    "PowerExperimentConfig",
    "SeriesTolerance",
    "SimConfig",
    "SizeExperimentConfig",
    "SizeTable",
    "SplitProfile",
    "TestReport",
    "TimeSeries",
    "FIXED",
    "adaptive_block_length",
    "ar1_generate",
    "bahadur_diagnostic",
    "bridge_sup_mc",
    "cusum_profile",
    "cusum_statistic",
    "decide",
    "default_bandwidth",
    "default_height_grid",
    "empirical_cdf_values",
    "fixed_block_length",
    "hl_median_profile",
    "hl_split_median",
    "hle_statistic",
    "hle_weighted_profile",
    "inject_shift",
    "kolmogorov_cdf",
    "kolmogorov_quantile",
    "lag1_autocorr",
    "run_all_tests",
    "run_power_experiment",
    "run_size_experiment",
    "run_test",
    "sigma_for_rank_tests",
    "simulate",
    "block_variance_sigma",
    "subsample_sigma",
    "t_scale_factor",
    "table_one_config",
    "u_hat_zero",
    "u_process_at",
    "u_quantile_at",
    "wmw_profile",
    "wmw_statistic",
    "write_results_csv",
]
