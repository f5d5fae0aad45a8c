"""Searches over state-evolution fixed points: phase boundaries and best lambda."""
import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed
from scipy import optimize

from sparse_recovery.core.errors import DomainError, NonMonotoneBoundaryError, SearchError
from sparse_recovery.core.penalty.thresholds import EXACT_RECOVERY_MSE, is_exact_recovery
from sparse_recovery.core.schemas.contracts import SeConfig, SeResult, SeStatus
from sparse_recovery.core.state_evolution.recursion import run_se

logger = logging.getLogger(__name__)

_FAILED = (SeStatus.QUADRATURE_FAILURE, SeStatus.DIVERGED)


def _noiseless_template(template: SeConfig, success_mse: float, max_iter: Optional[int]) -> SeConfig:
    update = {"sigma2": 0.0, "lambda_pen": 0.0, "mse_stop": success_mse}
    if max_iter is not None:
        update["max_iter"] = max_iter
    return template.model_copy(update=update)


def _recovers(alpha: float, rho: float, template: SeConfig, success_mse: float) -> bool:
    result = run_se(template.model_copy(update={"alpha": alpha, "rho": rho}))
    return result.status not in _FAILED and is_exact_recovery(result.state.e, success_mse)


def phase_boundary(
    rho: float,
    template: SeConfig,
    lo: float = 1e-3,
    hi: float = 1.5,
    resolution: float = 1e-3,
    success_mse: float = EXACT_RECOVERY_MSE,
    scan_points: int = 16,
    max_iter: Optional[int] = 5000,
    jobs: int = 1,
) -> float:
    """Smallest alpha in [lo, hi] whose noiseless SE fixed point is below success_mse.

    The bracket is scanned on `scan_points` evenly spaced values first; a success
    followed by a failure at larger alpha raises NonMonotoneBoundaryError. The
    first failure/success pair is then bisected down to `resolution`.
    """
    if not 0.0 < rho <= 1.0:
        raise DomainError(f"rho must lie in (0, 1], got {rho!r}")
    if not 0.0 < lo < hi:
        raise DomainError(f"invalid bracket [{lo}, {hi}]")
    config = _noiseless_template(template, success_mse, max_iter)

    alphas = np.linspace(lo, hi, max(scan_points, 2)).tolist()
    outcomes = Parallel(n_jobs=jobs)(
        delayed(_recovers)(alpha, rho, config, success_mse) for alpha in alphas
    )
    logger.debug(f"Boundary scan rho={rho}: {sum(outcomes)}/{len(outcomes)} successes")

    if not outcomes[-1]:
        raise SearchError(f"no recovery at alpha={hi} for rho={rho}; widen the bracket")
    first = outcomes.index(True)
    for alpha, ok in zip(alphas[first:], outcomes[first:]):
        if not ok:
            raise NonMonotoneBoundaryError(alphas[first], alpha, rho=rho)
    if first == 0:
        return lo

    failing, succeeding = alphas[first - 1], alphas[first]
    while succeeding - failing > resolution:
        mid = 0.5 * (failing + succeeding)
        if _recovers(mid, rho, config, success_mse):
            succeeding = mid
        else:
            failing = mid
    logger.info(f"Phase boundary {config.penalty.kind.value} rho={rho}: alpha_c={succeeding:.4f}")
    return succeeding


def _fixed_point(template: SeConfig, lambda_pen: float) -> SeResult:
    return run_se(template.model_copy(update={"lambda_pen": lambda_pen}))


def lambda_curve(template: SeConfig, lambdas: Sequence[float], jobs: int = 1) -> List[SeResult]:
    """SE fixed point for every lambda_pen in `lambdas`, in order."""
    return Parallel(n_jobs=jobs)(delayed(_fixed_point)(template, float(lam)) for lam in lambdas)


def _usable_error(result: SeResult) -> float:
    if result.status in _FAILED or not math.isfinite(result.state.e):
        return math.inf
    return result.state.e


def best_mse_over_lambda(
    template: SeConfig,
    lambda_min: float = 1e-4,
    lambda_max: float = 1e2,
    grid_points: int = 60,
    jobs: int = 1,
) -> Tuple[float, float]:
    """(lambda_star, mse_star) minimizing the SE fixed-point MSE over lambda_pen.

    A log-spaced grid locates the minimum, then a golden-section search in
    log10(lambda) refines it between the neighbouring grid points.
    """
    if not template.sigma2 > 0.0:
        raise DomainError("best_mse_over_lambda needs sigma2 > 0")
    if not 0.0 < lambda_min < lambda_max:
        raise DomainError(f"invalid lambda range [{lambda_min}, {lambda_max}]")

    log_grid = np.linspace(math.log10(lambda_min), math.log10(lambda_max), grid_points)
    results = lambda_curve(template, 10.0 ** log_grid, jobs=jobs)
    errors = np.array([_usable_error(r) for r in results])
    if not np.any(np.isfinite(errors)):
        raise SearchError(
            f"SE failed for every lambda at alpha={template.alpha}, rho={template.rho}, sigma2={template.sigma2}"
        )

    best = int(np.argmin(errors))
    lambda_star, mse_star = float(10.0 ** log_grid[best]), float(errors[best])
    if 0 < best < grid_points - 1 and np.isfinite(errors[best - 1]) and np.isfinite(errors[best + 1]):

        def objective(log_lambda: float) -> float:
            return _usable_error(_fixed_point(template, 10.0 ** log_lambda))

        try:
            refined = optimize.minimize_scalar(
                objective,
                bracket=(log_grid[best - 1], log_grid[best], log_grid[best + 1]),
                method="golden",
                options={"xtol": 1e-4},
            )
        except ValueError as e:
            # flat neighbourhood: the grid point stands
            logger.debug(f"Golden-section refinement skipped: {e}")
            refined = None
        if refined is not None and refined.fun < mse_star:
            lambda_star, mse_star = float(10.0 ** refined.x), float(refined.fun)

    logger.info(
        f"Best {template.penalty.kind.value} lambda at alpha={template.alpha} rho={template.rho}: "
        f"lambda*={lambda_star:.4g} mse*={mse_star:.4g}"
    )
    return lambda_star, mse_star
