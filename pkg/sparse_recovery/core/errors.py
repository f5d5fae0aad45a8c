"""Exception hierarchy for the recovery toolkit."""
from typing import Optional


class SparseRecoveryError(Exception):
    """Base class for toolkit errors."""


class DomainError(SparseRecoveryError, ValueError):
    """Argument outside the domain of an operation."""


class RegimeViolationError(DomainError):
    """Log-sum prox requested outside the continuous regime (epsilon <= sqrt(lambda_prox))."""

    def __init__(self, lambda_prox: float, epsilon: float):
        self.lambda_prox = lambda_prox
        self.epsilon = epsilon
        super().__init__(
            f"log-sum prox is discontinuous for epsilon={epsilon!r} <= sqrt(lambda_prox={lambda_prox!r}); "
            f"use adaptive_epsilon() to stay in the continuous regime"
        )


class QuadratureError(SparseRecoveryError):
    """Adaptive quadrature ran out of subdivisions before meeting its tolerance."""

    def __init__(self, estimate, error_bound, subdivisions: int):
        self.estimate = estimate
        self.error_bound = error_bound
        self.subdivisions = subdivisions
        super().__init__(
            f"quadrature did not converge after {subdivisions} panels "
            f"(estimate={estimate}, error bound={error_bound})"
        )


class DivergenceError(SparseRecoveryError):
    """An iterate became non-finite or exploded."""

    def __init__(self, iteration: int, reason: str):
        self.iteration = iteration
        self.reason = reason
        super().__init__(f"diverged at iteration {iteration}: {reason}")


class FactorizationError(SparseRecoveryError):
    """A linear-solve factorization could not be built."""


class NonMonotoneBoundaryError(SparseRecoveryError):
    """Recovery success is not monotone in alpha across the search bracket."""

    def __init__(self, alpha_success: float, alpha_failure: float, rho: Optional[float] = None):
        self.alpha_success = alpha_success
        self.alpha_failure = alpha_failure
        self.rho = rho
        super().__init__(
            f"non-monotone recovery pattern at rho={rho}: success at alpha={alpha_success:.6g} "
            f"but failure at larger alpha={alpha_failure:.6g}"
        )


class SearchError(SparseRecoveryError):
    """No candidate of a parameter search produced a usable result."""
