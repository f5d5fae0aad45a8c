"""Experiment service: trials, grids and aggregation behind every CLI command."""
import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed

from sparse_recovery.core.admm import run_admm
from sparse_recovery.core.amp import run_amp
from sparse_recovery.core.errors import SparseRecoveryError
from sparse_recovery.core.problem import derive_seed, generate_instance
from sparse_recovery.core.problem.metrics import mse
from sparse_recovery.core.schemas.contracts import (
    AdmmConfig,
    AdmmMode,
    AdmmTermination,
    AmpConfig,
    AmpTermination,
    PenaltyKind,
    PenaltySpec,
    ProblemConfig,
    ProblemInstance,
    SeConfig,
    SeResult,
    SeStatus,
)
from sparse_recovery.core.schemas.experiment_models import (
    ExperimentConfig,
    ResultRow,
    SolverKind,
    TrialOutcome,
)
from sparse_recovery.core.state_evolution import best_mse_over_lambda, lambda_curve, phase_boundary, run_se

logger = logging.getLogger(__name__)

# (solver, penalty, lambda_pen) run on every instance of a trial
TrialJob = Tuple[SolverKind, PenaltySpec, float]


def _amp_config(config: ExperimentConfig, spec: PenaltySpec, lambda_pen: float) -> AmpConfig:
    return AmpConfig(lambda_pen=lambda_pen, damping=config.damping, max_iter=config.max_iter, penalty=spec)


def _admm_config(config: ExperimentConfig, spec: PenaltySpec, lambda_pen: float, noiseless: bool) -> AdmmConfig:
    if noiseless:
        return AdmmConfig(max_iter=config.max_iter, penalty=spec, mode=AdmmMode.NOISELESS)
    return AdmmConfig(lambda_pen=lambda_pen, max_iter=config.max_iter, penalty=spec, mode=AdmmMode.NOISY)


def _se_config(config: ExperimentConfig, spec: PenaltySpec, alpha: float, rho: float, sigma2: float, lambda_pen: float) -> SeConfig:
    return SeConfig(
        alpha=alpha,
        rho=rho,
        sigma2=sigma2,
        lambda_pen=lambda_pen,
        damping=config.damping,
        max_iter=config.max_iter,
        penalty=spec,
    )


def _run_one(instance: ProblemInstance, config: ExperimentConfig, job: TrialJob, trial: int) -> TrialOutcome:
    solver, spec, lambda_pen = job
    outcome = TrialOutcome(solver=solver, penalty=spec.kind, lambda_pen=lambda_pen, trial=trial, seed=instance.config.seed)
    try:
        if solver == SolverKind.AMP:
            trace = run_amp(instance, _amp_config(config, spec, lambda_pen))
            diverged = trace.termination == AmpTermination.DIVERGED
            chi = trace.final_state.chi
            x_hat, termination = trace.final_state.x_hat, trace.termination.value
        else:
            noiseless = instance.config.sigma2 == 0.0
            trace = run_admm(instance, _admm_config(config, spec, lambda_pen, noiseless))
            diverged = trace.termination == AdmmTermination.DIVERGED
            chi = None
            x_hat, termination = trace.x_hat, trace.termination.value
    except SparseRecoveryError as e:
        logger.warning(f"Trial {trial} ({solver.value}, {spec.kind.value}, lambda={lambda_pen}) failed: {e}")
        return outcome.model_copy(update={"error": str(e)})

    error = mse(x_hat, instance.x_true)
    if diverged or not math.isfinite(error):
        logger.warning(f"Trial {trial} ({solver.value}, {spec.kind.value}, lambda={lambda_pen}) diverged")
    return outcome.model_copy(update={
        "mse": error,
        "chi": chi,
        "iterations": len(trace.records),
        "termination": termination,
        "diverged": diverged or not math.isfinite(error),
    })


def _run_trial(problem: ProblemConfig, config: ExperimentConfig, jobs: Sequence[TrialJob], trial: int) -> List[TrialOutcome]:
    """Generate one instance and run every job on it (joblib worker)."""
    instance = generate_instance(problem)
    return [_run_one(instance, config, job, trial) for job in jobs]


def _boundary(rho: float, template: SeConfig) -> Tuple[Optional[float], str]:
    try:
        return phase_boundary(rho, template), "ok"
    except SparseRecoveryError as e:
        logger.warning(f"Phase boundary at rho={rho} ({template.penalty.kind.value}) failed: {e}")
        return None, f"failed: {e}"


def _best(template: SeConfig, config: ExperimentConfig) -> Tuple[Optional[float], Optional[float], str]:
    try:
        lambda_star, mse_star = best_mse_over_lambda(
            template, config.lambda_min, config.lambda_max, grid_points=config.lambda_points
        )
        return lambda_star, mse_star, "ok"
    except SparseRecoveryError as e:
        logger.warning(f"Best-lambda search at alpha={template.alpha} rho={template.rho} failed: {e}")
        return None, None, f"failed: {e}"


def _se_row(result: SeResult, spec: PenaltySpec, alpha: float, rho: float, sigma2: float, lambda_pen: float) -> ResultRow:
    failed = result.status in (SeStatus.QUADRATURE_FAILURE, SeStatus.DIVERGED)
    return ResultRow(
        record="se",
        solver=SolverKind.SE.value,
        penalty=spec.kind.value,
        alpha=alpha,
        rho=rho,
        sigma2=sigma2,
        lambda_pen=lambda_pen,
        mse_mean=result.state.e,
        chi=result.state.chi,
        iterations=result.state.iter,
        termination=result.status.value,
        status=f"failed: {result.message}" if failed else "ok",
    )


def aggregate(outcomes: Sequence[TrialOutcome]) -> Dict:
    """Mean and standard error (sample std / sqrt(count)) over usable trials, plus the excluded count."""
    values = np.array([o.mse for o in outcomes if o.usable])
    excluded = len(outcomes) - values.size
    if values.size == 0:
        return {"mse_mean": None, "mse_stderr": None, "diverged": excluded, "status": "all_trials_failed"}
    stderr = float(np.std(values, ddof=1) / math.sqrt(values.size)) if values.size > 1 else None
    return {"mse_mean": float(np.mean(values)), "mse_stderr": stderr, "diverged": excluded, "status": "ok"}


class ExperimentService:
    """Runs the harness commands for one ExperimentConfig."""

    def __init__(self, config: ExperimentConfig):
        self.config = config

    def _parallel(self) -> Parallel:
        return Parallel(n_jobs=self.config.jobs)

    def _problem(self, alpha: float, rho: float, sigma2: float, trial: int) -> ProblemConfig:
        return ProblemConfig(
            n=self.config.n,
            alpha=alpha,
            rho=rho,
            sigma2=sigma2,
            seed=derive_seed(self.config.seed, trial),
        )

    def _trial_outcomes(self, alpha: float, rho: float, sigma2: float, jobs: Sequence[TrialJob]) -> List[List[TrialOutcome]]:
        """Per-trial outcome lists, in trial order."""
        return self._parallel()(
            delayed(_run_trial)(self._problem(alpha, rho, sigma2, t), self.config, list(jobs), t)
            for t in range(self.config.trials)
        )

    def _aggregate_row(self, outcomes: Sequence[TrialOutcome], alpha: float, rho: float, sigma2: float) -> ResultRow:
        first = outcomes[0]
        return ResultRow(
            record="aggregate",
            solver=first.solver.value,
            penalty=first.penalty.value,
            n=self.config.n,
            alpha=alpha,
            rho=rho,
            sigma2=sigma2,
            lambda_pen=first.lambda_pen,
            trials=len(outcomes),
            iterations=int(round(np.mean([o.iterations for o in outcomes]))),
            **aggregate(outcomes),
        )

    def _trial_row(self, outcome: TrialOutcome, alpha: float, rho: float, sigma2: float) -> ResultRow:
        return ResultRow(
            record="trial",
            solver=outcome.solver.value,
            penalty=outcome.penalty.value,
            n=self.config.n,
            alpha=alpha,
            rho=rho,
            sigma2=sigma2,
            lambda_pen=outcome.lambda_pen,
            trial=outcome.trial,
            seed=outcome.seed,
            trials=1,
            mse_mean=outcome.mse,
            chi=outcome.chi,
            iterations=outcome.iterations,
            termination=outcome.termination,
            diverged=int(outcome.diverged),
            status=f"failed: {outcome.error}" if outcome.error else "ok",
        )

    def solve(self) -> List[ResultRow]:
        """Per-trial and aggregate rows for every (penalty, solver) at one point; SE gives one row."""
        c = self.config
        logger.info(f"solve: alpha={c.alpha} rho={c.rho} sigma2={c.sigma2} lambda={c.lambda_pen} trials={c.trials}")
        rows: List[ResultRow] = []
        jobs = [(solver, spec, c.lambda_pen) for spec in c.penalty_specs() for solver in c.solvers if solver != SolverKind.SE]
        per_trial = self._trial_outcomes(c.alpha, c.rho, c.sigma2, jobs) if jobs else []

        for spec in c.penalty_specs():
            for solver in c.solvers:
                if solver == SolverKind.SE:
                    result = run_se(_se_config(c, spec, c.alpha, c.rho, c.sigma2, c.lambda_pen))
                    rows.append(_se_row(result, spec, c.alpha, c.rho, c.sigma2, c.lambda_pen))
                    continue
                index = jobs.index((solver, spec, c.lambda_pen))
                outcomes = [trial[index] for trial in per_trial]
                rows.extend(self._trial_row(o, c.alpha, c.rho, c.sigma2) for o in outcomes)
                rows.append(self._aggregate_row(outcomes, c.alpha, c.rho, c.sigma2))
        return rows

    def se_fixed_point(self) -> List[ResultRow]:
        """One SE fixed-point row per penalty."""
        c = self.config
        return [
            _se_row(run_se(_se_config(c, spec, c.alpha, c.rho, c.sigma2, c.lambda_pen)), spec, c.alpha, c.rho, c.sigma2, c.lambda_pen)
            for spec in c.penalty_specs()
        ]

    def phase_diagram(self) -> List[ResultRow]:
        """Noiseless ADMM mean MSE over the (alpha, rho) grid, then the SE boundary per penalty and rho."""
        c = self.config
        if c.sigma2 != 0.0:
            logger.warning(f"phase-diagram is noiseless; ignoring sigma2={c.sigma2}")
        alphas, rhos, specs = c.alpha_values(), c.rho_values(), c.penalty_specs()
        logger.info(f"phase-diagram: {len(alphas)}x{len(rhos)} grid, {c.trials} trials, N={c.n}")

        points = [(alpha, rho) for rho in rhos for alpha in alphas]
        jobs = [(SolverKind.ADMM, spec, 0.0) for spec in specs]
        per_point = self._parallel()(
            delayed(_run_trial)(self._problem(alpha, rho, 0.0, t), c, jobs, t)
            for alpha, rho in points
            for t in range(c.trials)
        )

        rows: List[ResultRow] = []
        for j, spec in enumerate(specs):
            for p, (alpha, rho) in enumerate(points):
                outcomes = [per_point[p * c.trials + t][j] for t in range(c.trials)]
                rows.append(self._aggregate_row(outcomes, alpha, rho, 0.0))

        for spec in specs:
            template = SeConfig(alpha=1.0, rho=1.0, damping=0.0, penalty=spec)
            boundaries = self._parallel()(delayed(_boundary)(rho, template) for rho in rhos)
            for rho, (alpha_c, status) in zip(rhos, boundaries):
                rows.append(ResultRow(
                    record="boundary",
                    solver=SolverKind.SE.value,
                    penalty=spec.kind.value,
                    alpha=alpha_c,
                    rho=rho,
                    sigma2=0.0,
                    lambda_pen=0.0,
                    status=status,
                ))
        return rows

    def mse_sweep(self) -> List[ResultRow]:
        """Final MSE versus lambda_pen for each requested solver and penalty."""
        c = self.config
        lambdas, specs = c.lambda_values(), c.penalty_specs()
        logger.info(f"mse-sweep: {len(lambdas)} lambdas, solvers={[s.value for s in c.solvers]}, trials={c.trials}")
        jobs = [
            (solver, spec, lam)
            for spec in specs
            for solver in c.solvers if solver != SolverKind.SE
            for lam in lambdas
        ]
        per_trial = self._trial_outcomes(c.alpha, c.rho, c.sigma2, jobs) if jobs else []

        rows: List[ResultRow] = []
        for spec in specs:
            for solver in c.solvers:
                if solver == SolverKind.SE:
                    template = _se_config(c, spec, c.alpha, c.rho, c.sigma2, 0.0)
                    results = lambda_curve(template, lambdas, jobs=c.jobs)
                    rows.extend(_se_row(r, spec, c.alpha, c.rho, c.sigma2, lam) for r, lam in zip(results, lambdas))
                    continue
                for lam in lambdas:
                    index = jobs.index((solver, spec, lam))
                    outcomes = [trial[index] for trial in per_trial]
                    rows.append(self._aggregate_row(outcomes, c.alpha, c.rho, c.sigma2))
        return rows

    def best_mse_grid(self) -> List[ResultRow]:
        """SE best MSE over lambda at every (alpha, rho) per penalty, plus d = logsum - l1."""
        c = self.config
        alphas, rhos, specs = c.alpha_values(), c.rho_values(), c.penalty_specs()
        logger.info(f"best-mse-grid: {len(alphas)}x{len(rhos)} grid, sigma2={c.sigma2}")
        points = [(alpha, rho) for rho in rhos for alpha in alphas]
        searches = self._parallel()(
            delayed(_best)(_se_config(c, spec, alpha, rho, c.sigma2, 0.0), c)
            for alpha, rho in points
            for spec in specs
        )

        rows: List[ResultRow] = []
        for p, (alpha, rho) in enumerate(points):
            best: Dict[PenaltyKind, Optional[float]] = {}
            for j, spec in enumerate(specs):
                lambda_star, mse_star, status = searches[p * len(specs) + j]
                best[spec.kind] = mse_star
                rows.append(ResultRow(
                    record="best",
                    solver=SolverKind.SE.value,
                    penalty=spec.kind.value,
                    alpha=alpha,
                    rho=rho,
                    sigma2=c.sigma2,
                    mse_mean=mse_star,
                    lambda_star=lambda_star,
                    status=status,
                ))
            if PenaltyKind.LOG_SUM in best and PenaltyKind.L1 in best:
                logsum, l1 = best[PenaltyKind.LOG_SUM], best[PenaltyKind.L1]
                available = logsum is not None and l1 is not None
                rows.append(ResultRow(
                    record="difference",
                    solver=SolverKind.SE.value,
                    alpha=alpha,
                    rho=rho,
                    sigma2=c.sigma2,
                    d=logsum - l1 if available else None,
                    status="ok" if available else "failed: missing best MSE",
                ))
        return rows

    def run(self, command: str) -> List[ResultRow]:
        """Dispatch a CLI command name to its method."""
        handlers = {
            "solve": self.solve,
            "se-fixed-point": self.se_fixed_point,
            "phase-diagram": self.phase_diagram,
            "mse-sweep": self.mse_sweep,
            "best-mse-grid": self.best_mse_grid,
        }
        if command not in handlers:
            raise SparseRecoveryError(f"unknown command {command!r}")
        return handlers[command]()
