"""Threshold selection for high-variance coordinates in equicorrelated Gaussian data."""

from .model import (
    ApproxRisk,
    DegenerateThresholdError,
    ModelParams,
    RiskBreakdown,
    TrialSample,
    approx_risk,
    determined_threshold,
    draw_observations,
    draw_signals,
    exact_risk,
    resolve_p,
)
from .oracle import OracleResult, between_group_gap, ideal_threshold_exact, ideal_threshold_grid, within_group_var
from .scoring import ConfusionCounts, confusion, discrepancy_pct, loss, select
from .stats import (
    TailBounds,
    abs_normal_tail,
    mills_bounds,
    squared_normal_cdf,
    std_normal_cdf,
    std_normal_quantile,
)
from .thresholds import (
    Determined,
    FixedC,
    Iterative,
    IterativeTrace,
    PoissonK,
    PowerMean,
    TopFraction,
    compute_threshold,
    expected_k,
    iterative_threshold,
    parse_method,
    poisson_normal_k,
    power_mean_threshold,
    top_k_threshold,
)

__version__ = "0.1.0"
