"""Approximate message passing with the log-sum or L1 prox as denoiser."""
import logging
from typing import Tuple

import numpy as np

from sparse_recovery.core.errors import DivergenceError
from sparse_recovery.core.penalty import prox, prox_derivative, prox_params_for
from sparse_recovery.core.problem.metrics import mse
from sparse_recovery.core.schemas.contracts import (
    AmpConfig,
    AmpRecord,
    AmpState,
    AmpTermination,
    AmpTrace,
    ProblemInstance,
)

logger = logging.getLogger(__name__)


def _damp(raw, old, damping: float):
    return (1.0 - damping) * raw + damping * old


class AmpSolver:
    """Runs AMP on one problem instance."""

    def __init__(self, instance: ProblemInstance, config: AmpConfig):
        self.instance = instance
        self.config = config
        self._a_transpose = None

    @property
    def a_transpose(self) -> np.ndarray:
        """Contiguous copy of A^T, built on first use."""
        if self._a_transpose is None:
            self._a_transpose = np.ascontiguousarray(self.instance.a_matrix.T)
        return self._a_transpose

    def initial_state(self) -> AmpState:
        """x_hat = 0, z = y, chi = 1."""
        return AmpState(
            x_hat=np.zeros(self.instance.n),
            z=np.array(self.instance.y, dtype=float),
            chi=1.0,
            iter=0,
        )

    def step(self, state: AmpState) -> Tuple[AmpState, float]:
        """One AMP iteration; returns the new state and the prox scale it used.

        Raises DivergenceError if any intermediate quantity is non-finite.
        """
        instance, config = self.instance, self.config
        alpha = instance.alpha
        h = state.x_hat + (1.0 / alpha) * (self.a_transpose @ state.z)
        if not np.all(np.isfinite(h)):
            raise DivergenceError(state.iter + 1, "non-finite effective observation h")

        lambda_prox = (state.chi + config.lambda_pen) / alpha
        if not np.isfinite(lambda_prox):
            raise DivergenceError(state.iter + 1, "non-finite prox scale")
        params = prox_params_for(lambda_prox, config.penalty)
        k = float(np.mean(prox_derivative(h, params, config.penalty))) / alpha
        x_raw = prox(h, params, config.penalty)
        chi_raw = (state.chi + config.lambda_pen) * k

        d = config.damping
        x_hat = _damp(x_raw, state.x_hat, d) if "x_hat" in config.damped_variables else x_raw
        chi = _damp(chi_raw, state.chi, d) if "chi" in config.damped_variables else chi_raw
        z = instance.y - instance.a_matrix @ x_hat + k * state.z

        if not (np.isfinite(chi) and np.all(np.isfinite(x_hat)) and np.all(np.isfinite(z))):
            raise DivergenceError(state.iter + 1, f"non-finite iterate (k={k}, chi={chi})")
        return AmpState(x_hat=x_hat, z=z, chi=max(chi, 0.0), iter=state.iter + 1), lambda_prox

    def run(self, use_ground_truth: bool = True) -> AmpTrace:
        """Iterate from initial_state() until a stopping rule fires.

        With ground truth the run stops once the MSE falls below mse_stop; otherwise it
        stops when ||x_new - x_old|| / max(||x_old||, 1) < iterate_tol. Divergence is
        recorded as a termination reason, never raised.
        """
        config = self.config
        state = self.initial_state()
        records = []
        termination = AmpTermination.MAX_ITER

        for _ in range(config.max_iter):
            try:
                new_state, lambda_prox = self.step(state)
            except DivergenceError as e:
                logger.warning(f"AMP diverged: {e}")
                termination = AmpTermination.DIVERGED
                break

            error = mse(new_state.x_hat, self.instance.x_true) if use_ground_truth else None
            records.append(AmpRecord(iter=new_state.iter, mse=error, chi=new_state.chi, lambda_prox=lambda_prox))
            change = np.linalg.norm(new_state.x_hat - state.x_hat) / max(np.linalg.norm(state.x_hat), 1.0)
            state = new_state

            if error is not None and error > config.divergence_mse:
                termination = AmpTermination.DIVERGED
                break
            if error is not None and error < config.mse_stop:
                termination = AmpTermination.MSE_STOP
                break
            if error is None and change < config.iterate_tol:
                termination = AmpTermination.CONVERGED
                break

        logger.debug(f"AMP lambda={config.lambda_pen} N={self.instance.n}: {termination.value} after {state.iter} iterations")
        return AmpTrace(records=records, final_state=state, termination=termination)


def amp_step(state: AmpState, instance: ProblemInstance, config: AmpConfig) -> AmpState:
    """One damped AMP update."""
    return AmpSolver(instance, config).step(state)[0]


def run_amp(instance: ProblemInstance, config: AmpConfig, use_ground_truth: bool = True) -> AmpTrace:
    """Run AMP from x_hat = 0, z = y, chi = 1."""
    return AmpSolver(instance, config).run(use_ground_truth=use_ground_truth)
