"""Command-line router: one argparse subcommand per experiment."""
import argparse
from typing import Callable, Dict

from sparse_recovery.core.schemas.experiment_models import ResultRow

COMMANDS = ("solve", "se-fixed-point", "phase-diagram", "mse-sweep", "best-mse-grid")

COMMAND_HELP: Dict[str, str] = {
    "solve": "run AMP/ADMM trials (and/or SE) at one (alpha, rho, sigma2, lambda) point",
    "se-fixed-point": "state-evolution fixed point per penalty at one point",
    "phase-diagram": "noiseless ADMM MSE over an (alpha, rho) grid plus SE boundaries",
    "mse-sweep": "final MSE versus lambda for SE, AMP and ADMM",
    "best-mse-grid": "SE best MSE over lambda on an (alpha, rho) grid and the log-sum minus L1 difference",
}

# Records emitted per command (the column set is shared)
COMMAND_RECORDS: Dict[str, str] = {
    "solve": "trial and aggregate rows per (penalty, solver); se rows for --solver se",
    "se-fixed-point": "se rows: mse_mean is the fixed-point E, chi the fixed-point chi",
    "phase-diagram": "aggregate rows (noiseless ADMM), boundary rows (alpha = alpha_c(rho))",
    "mse-sweep": "se rows and aggregate rows, one per (penalty, solver, lambda)",
    "best-mse-grid": "best rows (lambda_star, mse_mean) and difference rows (d)",
}

SOLVER_ALIASES = {"admmn": "admm"}


def _solver(value: str) -> str:
    value = value.lower()
    value = SOLVER_ALIASES.get(value, value)
    if value not in ("amp", "admm", "se"):
        raise argparse.ArgumentTypeError(f"invalid solver {value!r} (choose from amp, admm, se)")
    return value


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    """Flags default to None so that unset flags never override file or preset values."""
    point = parser.add_argument_group("problem point")
    point.add_argument("--n", type=int, help="signal dimension N")
    point.add_argument("--alpha", type=float, help="measurement rate M/N")
    point.add_argument("--rho", type=float, help="signal density")
    point.add_argument("--sigma2", type=float, help="noise variance")
    point.add_argument("--lambda", dest="lambda_pen", type=float, help="regularization parameter lambda_pen")

    method = parser.add_argument_group("methods")
    method.add_argument("--penalty", dest="penalties", action="append", choices=["logsum", "l1"],
                        help="penalty (repeatable)")
    method.add_argument("--solver", dest="solvers", action="append", type=_solver,
                        help="solver amp, admm or se (repeatable)")
    method.add_argument("--damping", type=float, help="fraction of the previous iterate retained")
    method.add_argument("--max-iter", dest="max_iter", type=int)
    method.add_argument("--delta-eps", dest="delta_eps", type=float, help="log-sum smoothing margin")

    grid = parser.add_argument_group("grids")
    grid.add_argument("--grid-size", dest="grid_size", type=int, help="points per (alpha, rho) axis")
    grid.add_argument("--alpha-max", dest="alpha_max", type=float)
    grid.add_argument("--rho-max", dest="rho_max", type=float)
    grid.add_argument("--lambda-min", dest="lambda_min", type=float)
    grid.add_argument("--lambda-max", dest="lambda_max", type=float)
    grid.add_argument("--lambda-points", dest="lambda_points", type=int)

    run = parser.add_argument_group("execution")
    run.add_argument("--trials", type=int)
    run.add_argument("--seed", type=int, help="master seed; trial seeds are derived from it")
    run.add_argument("--jobs", type=int, help="worker processes (-1 for all cores)")
    run.add_argument("--out", help="output path (stdout when omitted)")
    run.add_argument("--format", choices=["csv", "jsonl"])
    run.add_argument("--config", dest="config_file", help="JSON file with ExperimentConfig fields")
    run.add_argument("--paper-scale", dest="paper_scale", action="store_true", default=None,
                     help="start from the published experiment sizes")
    run.add_argument("--log-level", dest="log_level", help="DEBUG, INFO, WARNING or ERROR")


def build_parser(handler: Callable[[argparse.Namespace], int]) -> argparse.ArgumentParser:
    """Parser with one subcommand per experiment; each subcommand dispatches to `handler`."""
    parser = argparse.ArgumentParser(
        prog="sparse_recovery",
        description="Log-sum sparse recovery: AMP, state evolution and ADMM experiments.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    columns = ", ".join(ResultRow.columns())
    for name in COMMANDS:
        sub = subparsers.add_parser(
            name,
            help=COMMAND_HELP[name],
            description=COMMAND_HELP[name],
            epilog=f"CSV columns: {columns}. Records: {COMMAND_RECORDS[name]}.",
        )
        _add_common_flags(sub)
        if name == "solve":
            sub.add_argument("--trace", help="also write the per-iteration trace of trial 0 to this CSV path")
        sub.set_defaults(handler=handler)
    return parser
