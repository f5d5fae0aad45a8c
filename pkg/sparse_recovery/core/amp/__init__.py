"""Approximate message passing."""
from sparse_recovery.core.amp.solver import AmpSolver, amp_step, run_amp

__all__ = ["AmpSolver", "amp_step", "run_amp"]
