"""ADMM reconstruction."""
from sparse_recovery.core.admm.cache import LinearSolveCache, build_cache
from sparse_recovery.core.admm.solver import AdmmSolver, admm_noiseless_step, admm_noisy_step, run_admm

__all__ = [
    "AdmmSolver",
    "LinearSolveCache",
    "admm_noiseless_step",
    "admm_noisy_step",
    "build_cache",
    "run_admm",
]
