"""Thresholds for prox dead zones and recovery decisions."""
from typing import List

from sparse_recovery.core.schemas.contracts import PenaltySpec, ProxParams


# Smoothing margin used for every published experiment
DEFAULT_DELTA_EPS = 1e-10

# Noiseless recovery counts as exact below this MSE
EXACT_RECOVERY_MSE = 1e-4

# Runs whose MSE exceeds this are declared diverged
DIVERGENCE_MSE = 1e6


def dead_zone_threshold(params: ProxParams, spec: PenaltySpec) -> float:
    """Largest |h| mapped to zero by the prox (0 for the identity map)."""
    if params.lambda_prox == 0.0:
        return 0.0
    if spec.is_logsum:
        return params.lambda_prox / params.epsilon
    return params.lambda_prox


def kink_points(threshold: float, scale: float) -> List[float]:
    """Dead-zone edges +-threshold expressed in a standardized variable u = h / scale."""
    if threshold <= 0.0 or scale <= 0.0:
        return []
    edge = threshold / scale
    return [-edge, edge]


def is_exact_recovery(mse: float, threshold: float = EXACT_RECOVERY_MSE) -> bool:
    """Whether a noiseless reconstruction error counts as exact recovery."""
    return mse < threshold
