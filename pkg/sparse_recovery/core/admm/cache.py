"""Cached factorizations for the ADMM linear steps."""
import logging
from typing import Optional

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from sparse_recovery.core.errors import DomainError, FactorizationError
from sparse_recovery.core.schemas.contracts import AdmmMode, ProblemInstance

logger = logging.getLogger(__name__)


def _factor(matrix: np.ndarray, what: str):
    try:
        factor = cho_factor(matrix, lower=True, check_finite=True)
    except (LinAlgError, ValueError) as e:
        raise FactorizationError(f"Cholesky factorization of {what} failed: {e}") from e
    diag = np.abs(np.diag(factor[0]))
    # (max/min)^2 of the Cholesky diagonal bounds the condition number from below
    if diag.min() <= np.sqrt(np.finfo(float).eps) * diag.max():
        raise FactorizationError(f"{what} is numerically singular")
    return factor


class LinearSolveCache:
    """Factorization of A^T A + rho I (noisy) or of A A^T (noiseless).

    Noisy solves use the N x N system when M >= N and the Woodbury identity
    (A^T A + rho I)^-1 = (I - A^T (rho I + A A^T)^-1 A) / rho otherwise, so only
    a min(M, N)-sized matrix is ever factored. The noiseless projector onto
    {x : A x = y} is applied matrix-free.
    """

    def __init__(self, instance: ProblemInstance, rho_admm: float, mode: AdmmMode):
        if not rho_admm > 0.0:
            raise DomainError(f"rho_admm must be positive, got {rho_admm!r}")
        self.a_matrix = instance.a_matrix
        self.rho_admm = rho_admm
        self.mode = mode
        self.least_norm: Optional[np.ndarray] = None
        m, n = self.a_matrix.shape

        if mode == AdmmMode.NOISELESS:
            if m > n:
                raise DomainError(f"noiseless projection needs M <= N, got M={m}, N={n}")
            self._factor = _factor(self.a_matrix @ self.a_matrix.T, "A A^T")
            self.least_norm = self.a_matrix.T @ cho_solve(self._factor, instance.y)
            self._woodbury = False
        else:
            self._woodbury = m < n
            if self._woodbury:
                gram = self.a_matrix @ self.a_matrix.T
                gram[np.diag_indices(m)] += rho_admm
                self._factor = _factor(gram, "rho I + A A^T")
            else:
                gram = self.a_matrix.T @ self.a_matrix
                gram[np.diag_indices(n)] += rho_admm
                self._factor = _factor(gram, "A^T A + rho I")
        logger.debug(f"Built {mode.value} ADMM cache M={m} N={n} rho={rho_admm} woodbury={self._woodbury}")

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """(A^T A + rho I)^-1 rhs."""
        if self.mode != AdmmMode.NOISY:
            raise DomainError("solve() needs a noisy-mode cache")
        if self._woodbury:
            inner = cho_solve(self._factor, self.a_matrix @ rhs)
            return (rhs - self.a_matrix.T @ inner) / self.rho_admm
        return cho_solve(self._factor, rhs)

    def project_null(self, v: np.ndarray) -> np.ndarray:
        """(I - A^T (A A^T)^-1 A) v."""
        if self.mode != AdmmMode.NOISELESS:
            raise DomainError("project_null() needs a noiseless-mode cache")
        return v - self.a_matrix.T @ cho_solve(self._factor, self.a_matrix @ v)

    def project_feasible(self, v: np.ndarray) -> np.ndarray:
        """Closest point to v satisfying A x = y."""
        return self.least_norm + self.project_null(v)


def build_cache(instance: ProblemInstance, rho_admm: float, mode: AdmmMode) -> LinearSolveCache:
    """Factor the linear system of the x-update once for a run."""
    return LinearSolveCache(instance, rho_admm, mode)
