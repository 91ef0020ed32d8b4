"""Experiment configuration, convergence sweeps and the command line front end."""

from .config import ExperimentConfig, build_config, parse_degrees, read_config_file
from .experiments import (
    ConvergenceReport,
    RateFit,
    WeylReport,
    fit_rate,
    run_approx_experiment,
    run_frame,
    run_quad_experiment,
    run_weyl_experiment,
)

__all__ = [
    "ExperimentConfig",
    "build_config",
    "parse_degrees",
    "read_config_file",
    "ConvergenceReport",
    "RateFit",
    "WeylReport",
    "fit_rate",
    "run_approx_experiment",
    "run_frame",
    "run_quad_experiment",
    "run_weyl_experiment",
]
