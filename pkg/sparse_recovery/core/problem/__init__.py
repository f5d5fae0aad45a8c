"""Synthetic instances, reconstruction metrics and instance files."""
from sparse_recovery.core.problem.generator import InstanceGenerator, derive_seed, generate_instance
from sparse_recovery.core.problem.io import (
    load_instance_csv,
    load_instance_npz,
    save_instance_csv,
    save_instance_npz,
)
from sparse_recovery.core.problem.metrics import mse, support_fraction

__all__ = [
    "InstanceGenerator",
    "derive_seed",
    "generate_instance",
    "load_instance_csv",
    "load_instance_npz",
    "mse",
    "save_instance_csv",
    "save_instance_npz",
    "support_fraction",
]
