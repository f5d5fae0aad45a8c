"""Scaled-form ADMM for penalized least squares and for the noiseless constrained problem."""
import logging
from typing import Optional

import numpy as np

from sparse_recovery.core.admm.cache import LinearSolveCache, build_cache
from sparse_recovery.core.errors import DomainError
from sparse_recovery.core.penalty import prox, prox_params_for
from sparse_recovery.core.penalty.thresholds import DIVERGENCE_MSE, is_exact_recovery
from sparse_recovery.core.problem.metrics import mse
from sparse_recovery.core.schemas.contracts import (
    AdmmConfig,
    AdmmMode,
    AdmmRecord,
    AdmmState,
    AdmmTermination,
    AdmmTrace,
    ProblemInstance,
)

logger = logging.getLogger(__name__)


def _finite(*arrays) -> bool:
    return all(np.all(np.isfinite(a)) for a in arrays)


def admm_noisy_step(state: AdmmState, instance: ProblemInstance, cache: LinearSolveCache, config: AdmmConfig) -> AdmmState:
    """Ridge x-update, over-relaxation, prox z-update and dual update at fixed rho_admm."""
    rho = state.rho_admm
    x_tilde = cache.solve(instance.a_matrix.T @ instance.y + rho * (state.z - state.u))
    x = config.alpha_relax * x_tilde + (1.0 - config.alpha_relax) * state.z
    params = prox_params_for(config.lambda_pen / rho, config.penalty)
    z = prox(x + state.u, params, config.penalty)
    u = state.u + x - z
    return AdmmState(x=x, z=z, u=u, rho_admm=rho, iter=state.iter + 1)


def admm_noiseless_step(state: AdmmState, instance: ProblemInstance, cache: LinearSolveCache, config: AdmmConfig) -> AdmmState:
    """Projection onto A x = y, prox with scale 1/rho_admm, dual update, then rho_admm growth."""
    rho = state.rho_admm
    x = cache.project_feasible(state.z - state.u)
    params = prox_params_for(1.0 / rho, config.penalty)
    z = prox(x + state.u, params, config.penalty)
    u = state.u + x - z
    return AdmmState(x=x, z=z, u=u, rho_admm=rho * config.rho_growth, iter=state.iter + 1)


class AdmmSolver:
    """Runs ADMM on one problem instance."""

    def __init__(self, instance: ProblemInstance, config: AdmmConfig):
        if config.mode == AdmmMode.NOISELESS and instance.config.sigma2 > 0.0:
            raise DomainError(f"noiseless ADMM needs a noise-free instance, got sigma2={instance.config.sigma2}")
        self.instance = instance
        self.config = config
        self.factorizations = 0
        self._cache: Optional[LinearSolveCache] = None

    @property
    def cache(self) -> LinearSolveCache:
        """Factorization for the run; rho_admm only changes in noiseless mode, where it is not factored."""
        if self._cache is None:
            self._cache = build_cache(self.instance, self.config.rho_admm0, self.config.mode)
            self.factorizations += 1
        return self._cache

    def initial_state(self) -> AdmmState:
        n = self.instance.n
        return AdmmState(x=np.zeros(n), z=np.zeros(n), u=np.zeros(n), rho_admm=self.config.rho_admm0, iter=0)

    def step(self, state: AdmmState) -> AdmmState:
        if self.config.mode == AdmmMode.NOISELESS:
            return admm_noiseless_step(state, self.instance, self.cache, self.config)
        return admm_noisy_step(state, self.instance, self.cache, self.config)

    def run(self) -> AdmmTrace:
        """Iterate from z = u = 0 until both residual tolerances (or, noiseless, the MSE stop) are met."""
        config = self.config
        noiseless = config.mode == AdmmMode.NOISELESS
        state = self.initial_state()
        records = []
        termination = AdmmTermination.MAX_ITER
        primal_ok = dual_ok = False

        for _ in range(config.max_iter):
            new_state = self.step(state)
            if not _finite(new_state.x, new_state.z, new_state.u):
                logger.warning(f"ADMM produced a non-finite iterate at iteration {new_state.iter}")
                termination = AdmmTermination.DIVERGED
                break

            primal = float(np.linalg.norm(new_state.z - new_state.x))
            dual = float(state.rho_admm * np.linalg.norm(new_state.z - state.z))
            error = mse(new_state.z, self.instance.x_true)
            records.append(AdmmRecord(
                iter=new_state.iter,
                mse=error,
                primal_residual=primal,
                dual_residual=dual,
                rho_admm=new_state.rho_admm,
            ))
            state = new_state

            if error > DIVERGENCE_MSE:
                termination = AdmmTermination.DIVERGED
                break
            if noiseless and is_exact_recovery(error, config.mse_stop):
                termination = AdmmTermination.MSE_STOP
                break
            primal_ok, dual_ok = primal < config.tol_primal, dual < config.tol_dual
            if primal_ok and dual_ok:
                termination = AdmmTermination.BOTH_MET
                break
        else:
            if primal_ok:
                termination = AdmmTermination.PRIMAL_MET
            elif dual_ok:
                termination = AdmmTermination.DUAL_MET

        logger.debug(
            f"ADMM {config.mode.value} lambda={config.lambda_pen} N={self.instance.n}: "
            f"{termination.value} after {state.iter} iterations"
        )
        return AdmmTrace(records=records, final_state=state, termination=termination, factorizations=self.factorizations)


def run_admm(instance: ProblemInstance, config: AdmmConfig) -> AdmmTrace:
    """Run ADMM from z = u = 0; the reconstruction is trace.x_hat (the z iterate)."""
    return AdmmSolver(instance, config).run()
