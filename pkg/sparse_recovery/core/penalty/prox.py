"""Scalar penalties and their proximal operators.

Every function broadcasts over numpy arrays; a scalar argument gives a numpy scalar.

The log-sum prox is only evaluated in its continuous regime epsilon > sqrt(lambda_prox).
Callers obtain epsilon from adaptive_epsilon(), which keeps them there.
"""
import math
from typing import Optional

import numpy as np

from sparse_recovery.core.errors import DomainError, RegimeViolationError
from sparse_recovery.core.schemas.contracts import PenaltySpec, ProxParams


def penalty_value(x, spec: PenaltySpec, epsilon: Optional[float] = None):
    """R(x; eps) = log(|x|/eps + 1) for log-sum, |x| for L1."""
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise DomainError("penalty_value requires finite x")
    if spec.is_logsum:
        if epsilon is None or not epsilon > 0.0 or not math.isfinite(epsilon):
            raise DomainError(f"log-sum penalty needs a positive epsilon, got {epsilon!r}")
        return np.log1p(np.abs(x) / epsilon)[()]
    return np.abs(x)[()]


def normalized_penalty(x, spec: PenaltySpec, epsilon: Optional[float] = None):
    """R(x; eps) / R(1; eps).

    For log-sum this tends to the l0 indicator as eps -> 0+ and to |x| as eps -> inf.
    """
    return (np.asarray(penalty_value(x, spec, epsilon)) / penalty_value(1.0, spec, epsilon))[()]


def adaptive_epsilon(lambda_prox: float, delta_eps: float) -> float:
    """Smoothing rule eps = sqrt(lambda_prox) + delta_eps.

    Once delta_eps falls below the spacing of floats at sqrt(lambda_prox) the result
    is the next float above sqrt(lambda_prox), so it always exceeds it strictly.
    """
    if not (lambda_prox > 0.0 and math.isfinite(lambda_prox)):
        raise DomainError(f"lambda_prox must be positive and finite, got {lambda_prox!r}")
    if not (delta_eps > 0.0 and math.isfinite(delta_eps)):
        raise DomainError(f"delta_eps must be positive and finite, got {delta_eps!r}")
    root = math.sqrt(lambda_prox)
    return max(root + delta_eps, math.nextafter(root, math.inf))


def prox_params_for(lambda_prox: float, spec: PenaltySpec) -> ProxParams:
    """Prox parameters for a scale, with adaptive smoothing for log-sum.

    A zero scale yields the identity map for both penalties.
    """
    if not (lambda_prox >= 0.0 and math.isfinite(lambda_prox)):
        raise DomainError(f"lambda_prox must be non-negative and finite, got {lambda_prox!r}")
    if lambda_prox == 0.0:
        return ProxParams(lambda_prox=0.0, epsilon=spec.delta_eps)
    if spec.is_logsum:
        return ProxParams(lambda_prox=lambda_prox, epsilon=adaptive_epsilon(lambda_prox, spec.delta_eps))
    return ProxParams(lambda_prox=lambda_prox, epsilon=1.0)


def _check_regime(params: ProxParams, spec: PenaltySpec) -> None:
    if spec.is_logsum and params.lambda_prox > 0.0:
        if not params.epsilon > math.sqrt(params.lambda_prox):
            raise RegimeViolationError(params.lambda_prox, params.epsilon)


def _logsum_discriminant(a: np.ndarray, lam: float, eps: float) -> np.ndarray:
    """(a + eps)^2 - 4 lam, factored so it stays accurate next to the threshold.

    (a + eps)^2 - 4 lam = (a + eps - 2 sqrt(lam)) (a + eps + 2 sqrt(lam)) and
    a + eps - 2 sqrt(lam) = (a - lam/eps) + (eps - sqrt(lam))^2 / eps.
    """
    root = math.sqrt(lam)
    near = (a - lam / eps) + (eps - root) ** 2 / eps
    disc = near * (a + eps + 2.0 * root)
    # rounding can push the product below zero when eps - sqrt(lam) is tiny
    return np.maximum(disc, 0.0)


def prox(h, params: ProxParams, spec: PenaltySpec):
    """argmin_x 1/2 (x - h)^2 + lambda_prox R(x), componentwise.

    Raises RegimeViolationError for log-sum with epsilon <= sqrt(lambda_prox).
    """
    _check_regime(params, spec)
    h = np.asarray(h, dtype=float)
    lam = params.lambda_prox
    if lam == 0.0:
        return h.copy()[()]
    a = np.abs(h)
    if spec.is_logsum:
        eps = params.epsilon
        r = 0.5 * (a - eps + np.sqrt(_logsum_discriminant(a, lam, eps)))
        out = np.where(a > lam / eps, np.sign(h) * np.maximum(r, 0.0), 0.0)
    else:
        out = np.sign(h) * np.maximum(a - lam, 0.0)
    return out[()]


def prox_derivative(h, params: ProxParams, spec: PenaltySpec):
    """d prox / dh; zero on the closed dead zone |h| <= threshold.

    The log-sum slope grows without bound just above the threshold when
    epsilon - sqrt(lambda_prox) is small; it is returned unclamped.
    """
    _check_regime(params, spec)
    h = np.asarray(h, dtype=float)
    lam = params.lambda_prox
    if lam == 0.0:
        return np.ones_like(h)[()]
    a = np.abs(h)
    if spec.is_logsum:
        eps = params.epsilon
        active = a > lam / eps
        disc = _logsum_discriminant(a, lam, eps)
        with np.errstate(divide="ignore", invalid="ignore"):
            slope = 0.5 * (1.0 + (a + eps) / np.sqrt(disc))
        out = np.where(active, slope, 0.0)
    else:
        out = (a > lam).astype(float)
    return out[()]


def objective_value(x, a_matrix, y, lambda_pen: float, spec: PenaltySpec, epsilon: Optional[float] = None) -> float:
    """1/2 ||A x - y||^2 + lambda_pen * sum_i R(x_i)."""
    x = np.asarray(x, dtype=float)
    residual = np.asarray(a_matrix) @ x - np.asarray(y)
    return float(0.5 * residual @ residual + lambda_pen * np.sum(penalty_value(x, spec, epsilon)))
