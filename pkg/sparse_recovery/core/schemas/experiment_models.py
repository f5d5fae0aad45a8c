"""Pydantic schemas for experiment configuration and result rows."""
from enum import Enum
from typing import Optional, List

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator

from sparse_recovery.core.schemas.contracts import PenaltyKind, PenaltySpec


class SolverKind(str, Enum):
    """Reconstruction engines the harness can drive."""
    AMP = "amp"
    ADMM = "admm"
    SE = "se"


class OutputFormat(str, Enum):
    CSV = "csv"
    JSONL = "jsonl"


def _check_grid(name: str, values: Optional[List[float]]) -> Optional[List[float]]:
    if values is None:
        return values
    if not values:
        raise ValueError(f"{name} must not be empty")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ValueError(f"{name} must be sorted in increasing order without repeats")
    return values


class ExperimentConfig(BaseModel):
    """Parameter record shared by every command of the harness."""

    # single-point coordinates
    n: int = Field(500, ge=1, description="Signal dimension N")
    alpha: float = Field(0.9, gt=0.0, description="Measurement rate")
    rho: float = Field(0.4, ge=0.0, le=1.0, description="Signal density")
    sigma2: float = Field(1e-2, ge=0.0, description="Noise variance")
    lambda_pen: float = Field(0.1, ge=0.0, description="Regularization parameter")

    penalties: List[PenaltyKind] = Field(default_factory=lambda: [PenaltyKind.LOG_SUM])
    solvers: List[SolverKind] = Field(default_factory=lambda: [SolverKind.AMP])
    trials: int = Field(3, ge=1)
    seed: int = Field(0, ge=0, lt=2**64, description="Master seed")
    jobs: int = Field(1, description="Worker processes (joblib n_jobs; -1 uses all cores)")
    out: Optional[str] = Field(None, description="Output path; stdout when omitted")
    format: OutputFormat = OutputFormat.CSV
    paper_scale: bool = False

    # grids
    grid_size: int = Field(15, ge=1, description="Points per axis of (alpha, rho) grids")
    alpha_max: float = Field(1.0, gt=0.0)
    rho_max: float = Field(1.0, gt=0.0, le=1.0)
    alpha_grid: Optional[List[float]] = None
    rho_grid: Optional[List[float]] = None
    lambda_min: float = Field(1e-4, gt=0.0)
    lambda_max: float = Field(1e2, gt=0.0)
    lambda_points: int = Field(40, ge=2)
    lambda_grid: Optional[List[float]] = None

    # solver knobs
    damping: float = Field(0.2, ge=0.0, lt=1.0)
    max_iter: int = Field(1000, ge=1)
    delta_eps: float = Field(1e-10, gt=0.0)

    @field_validator("alpha_grid", "rho_grid", "lambda_grid")
    @classmethod
    def _sorted_grids(cls, value, info):
        return _check_grid(info.field_name, value)

    @field_validator("penalties", "solvers")
    @classmethod
    def _non_empty(cls, value, info):
        if not value:
            raise ValueError(f"{info.field_name} must not be empty")
        return list(dict.fromkeys(value))

    @field_validator("jobs")
    @classmethod
    def _jobs(cls, value):
        if value == 0:
            raise ValueError("jobs must be non-zero")
        return value

    @model_validator(mode="after")
    def _check_ranges(self):
        if self.lambda_min >= self.lambda_max:
            raise ValueError("lambda_min must be below lambda_max")
        if self.alpha_grid is not None and self.alpha_grid[0] <= 0.0:
            raise ValueError("alpha_grid values must be positive")
        if self.rho_grid is not None and (self.rho_grid[0] < 0.0 or self.rho_grid[-1] > 1.0):
            raise ValueError("rho_grid values must lie in [0, 1]")
        if self.lambda_grid is not None and self.lambda_grid[0] <= 0.0:
            raise ValueError("lambda_grid values must be positive")
        return self

    def alpha_values(self) -> List[float]:
        """Grid over (0, alpha_max] unless an explicit grid is given."""
        if self.alpha_grid is not None:
            return list(self.alpha_grid)
        return [self.alpha_max * i / self.grid_size for i in range(1, self.grid_size + 1)]

    def rho_values(self) -> List[float]:
        if self.rho_grid is not None:
            return list(self.rho_grid)
        return [self.rho_max * i / self.grid_size for i in range(1, self.grid_size + 1)]

    def lambda_values(self) -> List[float]:
        if self.lambda_grid is not None:
            return list(self.lambda_grid)
        return np.logspace(np.log10(self.lambda_min), np.log10(self.lambda_max), self.lambda_points).tolist()

    def penalty_specs(self) -> List[PenaltySpec]:
        return [PenaltySpec(kind=kind, delta_eps=self.delta_eps) for kind in self.penalties]


class ResultRow(BaseModel):
    """One output record; every command shares this column set."""
    record: str = Field(..., description="trial, aggregate, se, boundary, best or difference")
    solver: str = ""
    penalty: str = ""
    n: Optional[int] = None
    alpha: Optional[float] = None
    rho: Optional[float] = None
    sigma2: Optional[float] = None
    lambda_pen: Optional[float] = None
    trial: Optional[int] = None
    seed: Optional[int] = None
    trials: Optional[int] = None
    mse_mean: Optional[float] = None
    mse_stderr: Optional[float] = None
    chi: Optional[float] = None
    iterations: Optional[int] = None
    termination: str = ""
    diverged: int = 0
    lambda_star: Optional[float] = None
    d: Optional[float] = None
    status: str = "ok"

    @classmethod
    def columns(cls) -> List[str]:
        return list(cls.model_fields)


class TrialOutcome(BaseModel):
    """Result of one solver run on one generated instance."""
    solver: SolverKind
    penalty: PenaltyKind
    lambda_pen: float
    trial: int
    seed: int
    mse: Optional[float] = None
    chi: Optional[float] = None
    iterations: int = 0
    termination: str = ""
    diverged: bool = False
    error: str = ""

    @property
    def usable(self) -> bool:
        """Whether the run counts toward aggregate means."""
        return not self.diverged and not self.error and self.mse is not None and bool(np.isfinite(self.mse))
