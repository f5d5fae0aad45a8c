"""Penalty values, proximal operators and adaptive smoothing."""
from sparse_recovery.core.penalty.prox import (
    adaptive_epsilon,
    normalized_penalty,
    objective_value,
    penalty_value,
    prox,
    prox_derivative,
    prox_params_for,
)
from sparse_recovery.core.penalty.thresholds import dead_zone_threshold, is_exact_recovery, kink_points

__all__ = [
    "adaptive_epsilon",
    "dead_zone_threshold",
    "is_exact_recovery",
    "kink_points",
    "normalized_penalty",
    "objective_value",
    "penalty_value",
    "prox",
    "prox_derivative",
    "prox_params_for",
]
