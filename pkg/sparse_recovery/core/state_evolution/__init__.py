"""Scalar state evolution, Gaussian quadrature and fixed-point searches."""
from sparse_recovery.core.state_evolution.quadrature import gaussian_expectation
from sparse_recovery.core.state_evolution.recursion import (
    effective_noise_variance,
    initial_state,
    run_se,
    se_step,
    se_step_l1_closed_form,
    se_trajectory,
)
from sparse_recovery.core.state_evolution.search import best_mse_over_lambda, lambda_curve, phase_boundary

__all__ = [
    "best_mse_over_lambda",
    "effective_noise_variance",
    "gaussian_expectation",
    "initial_state",
    "lambda_curve",
    "phase_boundary",
    "run_se",
    "se_step",
    "se_step_l1_closed_form",
    "se_trajectory",
]
