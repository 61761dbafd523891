"""Numerical laboratory for stochastic differential equations."""

from ._core import (
    LinearSdeParams,
    bound_report,
    convergence_fit,
    error_series,
    exact_euler_step,
    exact_milstein_step,
    inverse_normal_cdf,
    levy_term,
    lognormal_moment,
    mean_curve,
    normal_draw,
    run_config_json,
    sample_increments,
    second_moment_curve,
    select_alpha,
    tv_distance,
)

__all__ = [
    "LinearSdeParams",
    "bound_report",
    "convergence_fit",
    "error_series",
    "exact_euler_step",
    "exact_milstein_step",
    "inverse_normal_cdf",
    "levy_term",
    "lognormal_moment",
    "mean_curve",
    "normal_draw",
    "run_config_json",
    "sample_increments",
    "second_moment_curve",
    "select_alpha",
    "tv_distance",
]
