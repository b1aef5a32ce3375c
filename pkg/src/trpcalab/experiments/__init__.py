"""Monte-Carlo experiments: configuration, trial runners and summary statistics."""

from .config import ConfigError, ExperimentConfig, parse_grid, read_flat_config
from .runner import (
    exp_certificate,
    exp_infty_contraction,
    exp_phase_grid,
    exp_pt_concentration,
    exp_pt_omega_norm,
    exp_sign_spectral,
    exp_spectral_deviation,
    run_experiment,
)
from .stats import pass_rate, sign_trend_test, summarize

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "parse_grid",
    "read_flat_config",
    "exp_certificate",
    "exp_infty_contraction",
    "exp_phase_grid",
    "exp_pt_concentration",
    "exp_pt_omega_norm",
    "exp_sign_spectral",
    "exp_spectral_deviation",
    "run_experiment",
    "pass_rate",
    "sign_trend_test",
    "summarize",
]
