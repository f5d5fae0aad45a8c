"""Reconstruction metrics."""
import numpy as np

from sparse_recovery.core.errors import DomainError


def mse(x_hat, x_true) -> float:
    """(1/N) ||x_hat - x_true||^2."""
    x_hat = np.asarray(x_hat, dtype=float)
    x_true = np.asarray(x_true, dtype=float)
    if x_hat.shape != x_true.shape:
        raise DomainError(f"length mismatch: {x_hat.shape} vs {x_true.shape}")
    diff = x_hat - x_true
    return float(np.mean(diff * diff))


def support_fraction(x) -> float:
    """Fraction of nonzero components."""
    x = np.asarray(x)
    return float(np.count_nonzero(x)) / x.size
