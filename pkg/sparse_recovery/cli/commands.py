"""Command handlers: configuration layering, execution and exit codes."""
import argparse
import logging
from typing import Dict, List, Optional

from sparse_recovery.cli.router import build_parser
from sparse_recovery.core.admm import run_admm
from sparse_recovery.core.amp import run_amp
from sparse_recovery.core.errors import DomainError, SparseRecoveryError
from sparse_recovery.core.presets import load_config_file, load_preset, merge_layers
from sparse_recovery.core.problem import derive_seed, generate_instance
from sparse_recovery.core.schemas.contracts import AdmmConfig, AdmmMode, AmpConfig, ProblemConfig
from sparse_recovery.core.schemas.experiment_models import ExperimentConfig, SolverKind
from sparse_recovery.core.schemas.guardrails import validate_config
from sparse_recovery.logging_config import setup_logging
from sparse_recovery.services.experiment_service import ExperimentService
from sparse_recovery.services.export_service import ExportService
from sparse_recovery.settings import Settings, get_settings

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_RUNTIME = 3

PUBLISHED_PRESETS: Dict[str, str] = {
    "solve": "published_solve_v1.json",
    "se-fixed-point": "published_solve_v1.json",
    "phase-diagram": "published_phase_diagram_v1.json",
    "mse-sweep": "published_mse_sweep_v1.json",
    "best-mse-grid": "published_best_mse_grid_v1.json",
}

COMMAND_DEFAULTS: Dict[str, Dict] = {
    "se-fixed-point": {"solvers": ["se"], "penalties": ["logsum", "l1"]},
    "phase-diagram": {"sigma2": 0.0, "solvers": ["admm"], "penalties": ["logsum", "l1"]},
    "mse-sweep": {"solvers": ["se", "amp", "admm"], "penalties": ["logsum", "l1"]},
    "best-mse-grid": {"solvers": ["se"], "penalties": ["logsum", "l1"], "alpha_max": 1.5},
}

_CONFIG_FIELDS = set(ExperimentConfig.model_fields)


def command_defaults(command: str, settings: Settings) -> Dict:
    """Second layer: fixed choices of each command, with the smaller search sizes of best-mse-grid."""
    defaults = dict(COMMAND_DEFAULTS.get(command, {}))
    if command == "best-mse-grid":
        defaults.update(grid_size=settings.desk_best_grid_size, lambda_points=settings.desk_best_lambda_points)
    return defaults


def desk_defaults(settings: Settings) -> Dict:
    """Base layer: reduced experiment sizes and solver defaults from the environment."""
    return {
        "n": settings.desk_n,
        "grid_size": settings.desk_grid_size,
        "trials": settings.desk_trials,
        "lambda_points": settings.desk_lambda_points,
        "damping": settings.damping,
        "max_iter": settings.max_iter,
        "delta_eps": settings.delta_eps,
        "format": settings.output_format,
        "jobs": settings.default_jobs,
    }


def build_config(args: argparse.Namespace) -> Optional[ExperimentConfig]:
    """Layer desk defaults, command defaults, the published-scale preset, the config file and flags.

    Returns None when the merged configuration is invalid; file problems raise
    FileNotFoundError or ValueError.
    """
    settings = get_settings()
    layers: List[Dict] = [desk_defaults(settings), command_defaults(args.command, settings)]
    if getattr(args, "paper_scale", None):
        layers.append(load_preset(PUBLISHED_PRESETS[args.command]))
    if getattr(args, "config_file", None):
        layers.append(load_config_file(args.config_file))
    layers.append({key: value for key, value in vars(args).items() if key in _CONFIG_FIELDS})
    return validate_config(merge_layers(*layers), ExperimentConfig)


def check_preconditions(command: str, config: ExperimentConfig) -> None:
    """Reject configurations a command cannot run; raises DomainError."""
    if command in ("mse-sweep", "best-mse-grid") and not config.sigma2 > 0.0:
        raise DomainError(f"{command} needs sigma2 > 0, got {config.sigma2}")
    if command == "phase-diagram" and config.alpha_max > 1.0 and config.alpha_grid is None:
        logger.warning("phase-diagram points with alpha > 1 are outside noiseless ADMM's M <= N range")


def write_solve_trace(config: ExperimentConfig, path: str) -> int:
    """Per-iteration trace of trial 0 for the first penalty and the first AMP/ADMM solver."""
    solvers = [s for s in config.solvers if s != SolverKind.SE]
    if not solvers:
        raise DomainError("--trace needs --solver amp or --solver admm")
    spec = config.penalty_specs()[0]
    problem = ProblemConfig(
        n=config.n, alpha=config.alpha, rho=config.rho, sigma2=config.sigma2, seed=derive_seed(config.seed, 0)
    )
    instance = generate_instance(problem)
    if solvers[0] == SolverKind.AMP:
        amp = AmpConfig(lambda_pen=config.lambda_pen, damping=config.damping, max_iter=config.max_iter, penalty=spec)
        rows = run_amp(instance, amp).to_rows()
    else:
        mode = AdmmMode.NOISELESS if config.sigma2 == 0.0 else AdmmMode.NOISY
        admm = AdmmConfig(
            lambda_pen=0.0 if mode == AdmmMode.NOISELESS else config.lambda_pen,
            max_iter=config.max_iter,
            penalty=spec,
            mode=mode,
        )
        rows = run_admm(instance, admm).to_rows()
    return ExportService().write_trace(rows, path)


def run_command(args: argparse.Namespace) -> int:
    """Execute one parsed subcommand and map failures to exit codes."""
    setup_logging(args.log_level)
    try:
        config = build_config(args)
    except (OSError, ValueError) as e:
        logger.error(f"Could not load configuration: {e}")
        return EXIT_USAGE
    if config is None:
        return EXIT_USAGE
    try:
        check_preconditions(args.command, config)
    except DomainError as e:
        logger.error(f"Invalid configuration: {e}")
        return EXIT_USAGE

    try:
        rows = ExperimentService(config).run(args.command)
        ExportService().write_rows(rows, config.out, config.format)
        if getattr(args, "trace", None):
            write_solve_trace(config, args.trace)
    except (SparseRecoveryError, OSError) as e:
        logger.error(f"{args.command} failed: {e}")
        return EXIT_RUNTIME
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    """Entry point; argparse usage errors exit with status 2 on their own."""
    parser = build_parser(run_command)
    args = parser.parse_args(argv)
    return args.handler(args)
