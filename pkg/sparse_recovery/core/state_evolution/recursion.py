"""State-evolution recursion for the (E, chi) order parameters.

With h* = x0 + s z, s^2 = (sigma2 + E) / alpha and x0 ~ (1 - rho) delta + rho N(0, 1),
each expectation splits into an x0 = 0 part (h* ~ N(0, s^2)) and an x0 != 0 part
(h* ~ N(0, v^2), v^2 = 1 + s^2). In the second part x0 | h* ~ N(h*/v^2, s^2/v^2), so

    E[(S(h*) - x0)^2] = E[(S(h*) - h*/v^2)^2] + s^2/v^2

and every term is a one-dimensional Gaussian integral over u = h*/scale. The mean
prox slope uses Gaussian integration by parts, E[S'(h)] = E[h S(h)] / Var(h), which
holds because S is continuous and keeps the integrable near-threshold spike of S'
out of the quadrature.
"""
import logging
import math
from typing import List, Tuple

import numpy as np
from scipy.special import erfc

from sparse_recovery.core.errors import DivergenceError, DomainError, QuadratureError
from sparse_recovery.core.penalty import dead_zone_threshold, kink_points, prox, prox_params_for
from sparse_recovery.core.penalty.thresholds import DIVERGENCE_MSE
from sparse_recovery.core.schemas.contracts import (
    PenaltySpec,
    ProxParams,
    SeConfig,
    SeRecord,
    SeResult,
    SeState,
    SeStatus,
)
from sparse_recovery.core.state_evolution.quadrature import gaussian_expectation

logger = logging.getLogger(__name__)

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)

# Standardized thresholds beyond this contribute nothing representable
_TAIL_LIMIT = 40.0


def effective_noise_variance(e: float, config: SeConfig) -> float:
    """Variance of h* - x0 at MSE e.

    With A ~ N(0, 1/N) and h = x_hat + A^T z / alpha the measurement noise is also
    amplified by 1/alpha; noise_over_alpha=False keeps sigma2 unscaled.
    """
    if config.noise_over_alpha:
        return (config.sigma2 + e) / config.alpha
    return config.sigma2 + e / config.alpha


def _effective_scale(state: SeState, config: SeConfig) -> float:
    return math.sqrt(effective_noise_variance(state.e, config))


def _prox_scale(state: SeState, config: SeConfig) -> float:
    return (state.chi + config.lambda_pen) / config.alpha


def _zero_signal_moments_quadrature(s: float, params: ProxParams, spec: PenaltySpec, config: SeConfig) -> Tuple[float, float]:
    """(E[S(h)^2], E[S'(h)]) for h ~ N(0, s^2)."""
    if s == 0.0:
        return 0.0, (1.0 if params.lambda_prox == 0.0 else 0.0)

    def integrand(u):
        shrunk = prox(s * u, params, spec)
        return np.stack([shrunk * shrunk, u * shrunk])

    kinks = kink_points(dead_zone_threshold(params, spec), s)
    (second, cross), _ = gaussian_expectation(integrand, kinks, config.quad)
    return float(second), float(cross) / s


def _signal_moments_quadrature(s: float, params: ProxParams, spec: PenaltySpec, config: SeConfig) -> Tuple[float, float]:
    """(E[(S(h) - x0)^2], E[S'(h)]) for x0 ~ N(0, 1), h = x0 + s z."""
    v2 = 1.0 + s * s
    v = math.sqrt(v2)

    def integrand(u):
        shrunk = prox(v * u, params, spec)
        gap = shrunk - u / v
        return np.stack([gap * gap, u * shrunk])

    kinks = kink_points(dead_zone_threshold(params, spec), v)
    (gap_sq, cross), _ = gaussian_expectation(integrand, kinks, config.quad)
    return float(gap_sq) + s * s / v2, float(cross) / v


def _gaussian_tail(a: float) -> float:
    return 0.5 * float(erfc(a / math.sqrt(2.0)))


def _soft_threshold_moments(scale: float, threshold: float) -> Tuple[float, float]:
    """(E[S(h)^2], E[S'(h)]) of the soft threshold for h ~ N(0, scale^2), scale > 0."""
    a = threshold / scale
    if a > _TAIL_LIMIT:
        return 0.0, 0.0
    tail = _gaussian_tail(a)
    density = _INV_SQRT_2PI * math.exp(-0.5 * a * a)
    second = 2.0 * scale * scale * ((1.0 + a * a) * tail - a * density)
    return max(second, 0.0), 2.0 * tail


def _moments(state: SeState, config: SeConfig, closed_form: bool) -> Tuple[float, float, float]:
    """Raw (E+, mean slope E[S'], lambda_prox) for one SE update."""
    spec = config.penalty
    s = _effective_scale(state, config)
    lambda_prox = _prox_scale(state, config)
    params = prox_params_for(lambda_prox, spec)
    rho = config.rho

    e_next = 0.0
    slope = 0.0
    if rho < 1.0:
        if closed_form and s > 0.0:
            zero_sq, zero_slope = _soft_threshold_moments(s, lambda_prox)
        elif closed_form:
            zero_sq, zero_slope = 0.0, (1.0 if lambda_prox == 0.0 else 0.0)
        else:
            zero_sq, zero_slope = _zero_signal_moments_quadrature(s, params, spec, config)
        e_next += (1.0 - rho) * zero_sq
        slope += (1.0 - rho) * zero_slope
    if rho > 0.0:
        if closed_form:
            v = math.sqrt(1.0 + s * s)
            second, signal_slope = _soft_threshold_moments(v, lambda_prox)
            # E[S^2] - 2 E[h S] / v^2 + 1 with E[h S] = v^2 E[S']
            signal_err = max(second - 2.0 * signal_slope + 1.0, 0.0)
        else:
            signal_err, signal_slope = _signal_moments_quadrature(s, params, spec, config)
        e_next += rho * signal_err
        slope += rho * signal_slope
    return e_next, slope, lambda_prox


def _advance(state: SeState, config: SeConfig, closed_form: bool) -> Tuple[SeState, SeRecord]:
    e_raw, slope, lambda_prox = _moments(state, config, closed_form)
    k = slope / config.alpha
    chi_raw = (state.chi + config.lambda_pen) * k
    d = config.damping
    e_new = (1.0 - d) * e_raw + d * state.e
    chi_new = (1.0 - d) * chi_raw + d * state.chi
    if not (math.isfinite(e_new) and math.isfinite(chi_new)):
        raise DivergenceError(state.iter + 1, f"non-finite order parameter (E={e_new}, chi={chi_new})")
    if e_new > DIVERGENCE_MSE:
        raise DivergenceError(state.iter + 1, f"E={e_new:.3g} exceeds {DIVERGENCE_MSE:g}")
    new_state = SeState(e=max(e_new, 0.0), chi=max(chi_new, 0.0), iter=state.iter + 1)
    record = SeRecord(iter=new_state.iter, e=new_state.e, chi=new_state.chi, k=k, lambda_prox=lambda_prox)
    return new_state, record


def se_step(state: SeState, config: SeConfig) -> SeState:
    """One damped SE update evaluated by adaptive quadrature (either penalty)."""
    return _advance(state, config, closed_form=False)[0]


def se_step_l1_closed_form(state: SeState, config: SeConfig) -> SeState:
    """One damped SE update for L1 through erfc expressions."""
    if config.penalty.is_logsum:
        raise DomainError("closed-form SE is only available for the L1 penalty")
    return _advance(state, config, closed_form=True)[0]


def _uses_closed_form(config: SeConfig) -> bool:
    return (not config.penalty.is_logsum) and config.l1_closed_form


def initial_state(config: SeConfig) -> SeState:
    """E = E[(x0)^2] = rho and chi = 1."""
    return SeState(e=config.rho, chi=1.0, iter=0)


def run_se(config: SeConfig) -> SeResult:
    """Iterate SE from the standard initialization until a fixed point, the MSE stop or max_iter."""
    closed_form = _uses_closed_form(config)
    state = initial_state(config)
    trace: List[SeRecord] = []
    status = SeStatus.MAX_ITER
    failed_iteration = None
    message = ""

    for _ in range(config.max_iter):
        try:
            new_state, record = _advance(state, config, closed_form)
        except QuadratureError as e:
            status = SeStatus.QUADRATURE_FAILURE
            failed_iteration = state.iter + 1
            message = str(e)
            logger.warning(f"SE quadrature failed at iteration {failed_iteration} (alpha={config.alpha}, rho={config.rho}, lambda={config.lambda_pen}): {e}")
            break
        except DivergenceError as e:
            status = SeStatus.DIVERGED
            failed_iteration = e.iteration
            message = str(e)
            logger.debug(f"SE diverged (alpha={config.alpha}, rho={config.rho}, lambda={config.lambda_pen}): {e}")
            break
        trace.append(record)
        delta = abs(new_state.e - state.e)
        state = new_state
        if state.e < config.mse_stop:
            status = SeStatus.MSE_STOP
            break
        if delta < config.fixed_point_tol:
            status = SeStatus.FIXED_POINT
            break

    logger.debug(f"SE {config.penalty.kind.value} alpha={config.alpha} rho={config.rho} lambda={config.lambda_pen}: {status.value} after {state.iter} iterations, E={state.e:.6g}")
    return SeResult(state=state, trace=trace, status=status, failed_iteration=failed_iteration, message=message)


def se_trajectory(config: SeConfig, n_iter: int) -> List[float]:
    """E^[t] for t = 0..n_iter without early stopping."""
    closed_form = _uses_closed_form(config)
    state = initial_state(config)
    errors = [state.e]
    for _ in range(n_iter):
        state, _ = _advance(state, config, closed_form)
        errors.append(state.e)
    return errors
