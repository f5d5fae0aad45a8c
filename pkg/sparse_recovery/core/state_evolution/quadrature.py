"""Gaussian expectations by adaptive Gauss-Kronrod quadrature (scipy quad_vec)."""
import logging
import math
from typing import Callable, Iterable, Tuple, Union

import numpy as np
from scipy import integrate

from sparse_recovery.core.errors import DomainError, QuadratureError
from sparse_recovery.core.schemas.contracts import QuadratureConfig

logger = logging.getLogger(__name__)

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)

# quad_vec status for an estimate limited by rounding error
_ROUNDING_LIMITED = 2

Integrand = Callable[[np.ndarray], np.ndarray]
Estimate = Union[float, np.ndarray]


def gaussian_expectation(f: Integrand, kinks: Iterable[float], quad: QuadratureConfig) -> Tuple[Estimate, float]:
    """E[f(Z)] for Z ~ N(0, 1), integrated over [-tail_cut, tail_cut].

    The range is split at `kinks` so no subinterval straddles a kink. `f` receives a
    0-d array and returns a scalar, or a stack of k values to integrate k functions
    in one adaptive pass (the tolerance then applies to the largest component).

    Returns (value, error_bound); value has shape (k,) for stacked integrands.
    Raises QuadratureError when max_subdivisions subintervals do not meet
    max(abs_tol, rel_tol * |value|) or the integrand turns non-finite.
    """
    kinks = list(kinks)
    if not all(math.isfinite(k) for k in kinks):
        raise DomainError("kinks must be finite")

    def weighted(u: float) -> np.ndarray:
        return np.asarray(f(np.asarray(u)), dtype=float) * (_INV_SQRT_2PI * math.exp(-0.5 * u * u))

    value, error, info = integrate.quad_vec(
        weighted,
        -quad.tail_cut,
        quad.tail_cut,
        epsabs=quad.abs_tol,
        epsrel=quad.rel_tol,
        norm="max",
        limit=quad.max_subdivisions,
        points=kinks or None,
        quadrature="gk15",
        full_output=True,
    )
    if info.status == _ROUNDING_LIMITED:
        logger.debug(f"Quadrature limited by rounding: error={error}")
    elif not info.success:
        subdivisions = len(info.intervals)
        logger.debug(f"Quadrature stopped ({info.message}): estimate={value}, error={error}, panels={subdivisions}")
        raise QuadratureError(value, error, subdivisions)

    value = np.asarray(value, dtype=float)
    if value.ndim == 0:
        return float(value), float(error)
    return value, float(error)
