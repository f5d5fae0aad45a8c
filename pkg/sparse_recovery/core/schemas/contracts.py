"""Pydantic schemas for solver inputs, states and traces."""
from enum import Enum
from typing import Optional, List, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class PenaltyKind(str, Enum):
    """Supported sparsity penalties."""
    LOG_SUM = "logsum"
    L1 = "l1"


class PenaltySpec(BaseModel):
    """Which penalty is used and how its prox is parameterized."""
    model_config = ConfigDict(frozen=True)

    kind: PenaltyKind = Field(PenaltyKind.LOG_SUM, description="Penalty family")
    delta_eps: float = Field(1e-10, gt=0.0, description="Adaptive smoothing margin (log-sum only)")

    @classmethod
    def logsum(cls, delta_eps: float = 1e-10) -> "PenaltySpec":
        return cls(kind=PenaltyKind.LOG_SUM, delta_eps=delta_eps)

    @classmethod
    def l1(cls) -> "PenaltySpec":
        return cls(kind=PenaltyKind.L1)

    @property
    def is_logsum(self) -> bool:
        return self.kind == PenaltyKind.LOG_SUM


class ProxParams(BaseModel):
    """Scale and smoothing of a scalar prox. lambda_prox = 0 is the identity map."""
    model_config = ConfigDict(frozen=True)

    lambda_prox: float = Field(..., ge=0.0, description="Prox scale")
    epsilon: float = Field(..., gt=0.0, description="Log-sum smoothing parameter")


class ProblemConfig(BaseModel):
    """Generating configuration of a synthetic instance."""
    model_config = ConfigDict(frozen=True)

    n: int = Field(..., ge=1, description="Signal dimension N")
    alpha: float = Field(..., gt=0.0, description="Measurement rate M/N")
    rho: float = Field(..., ge=0.0, le=1.0, description="Signal density")
    sigma2: float = Field(0.0, ge=0.0, description="Noise variance")
    seed: int = Field(0, ge=0, lt=2**64, description="64-bit generator seed")

    @property
    def m(self) -> int:
        """Number of measurements, round(alpha * n) with a floor of one."""
        return max(1, int(round(self.alpha * self.n)))


class ProblemInstance(BaseModel):
    """Measurement matrix, truth, noise and observation of one trial."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    a_matrix: np.ndarray = Field(..., description="M x N measurement matrix")
    x_true: np.ndarray = Field(..., description="True signal, length N")
    noise: np.ndarray = Field(..., description="Noise vector, length M")
    y: np.ndarray = Field(..., description="Observation A x0 + w, length M")
    config: ProblemConfig

    @model_validator(mode="after")
    def _check_shapes(self):
        m, n = self.a_matrix.shape
        if self.x_true.shape != (n,) or self.noise.shape != (m,) or self.y.shape != (m,):
            raise ValueError(
                f"inconsistent shapes: A{self.a_matrix.shape}, x0{self.x_true.shape}, "
                f"w{self.noise.shape}, y{self.y.shape}"
            )
        return self

    @property
    def m(self) -> int:
        return self.a_matrix.shape[0]

    @property
    def n(self) -> int:
        return self.a_matrix.shape[1]

    @property
    def alpha(self) -> float:
        return self.m / self.n

    @classmethod
    def from_arrays(cls, a_matrix, y, x_true, noise=None, seed: int = 0) -> "ProblemInstance":
        """Wrap hand-built arrays; noise defaults to y - A x0."""
        a_matrix = np.asarray(a_matrix, dtype=float)
        y = np.asarray(y, dtype=float)
        x_true = np.asarray(x_true, dtype=float)
        if noise is None:
            noise = y - a_matrix @ x_true
        m, n = a_matrix.shape
        config = ProblemConfig(
            n=n,
            alpha=m / n,
            rho=float(np.count_nonzero(x_true)) / n,
            sigma2=float(np.mean(np.asarray(noise) ** 2)),
            seed=seed,
        )
        return cls(a_matrix=a_matrix, x_true=x_true, noise=np.asarray(noise, dtype=float), y=y, config=config)


# --- AMP -------------------------------------------------------------------

class AmpTermination(str, Enum):
    MSE_STOP = "MseStop"
    CONVERGED = "Converged"
    MAX_ITER = "MaxIter"
    DIVERGED = "Diverged"


class AmpConfig(BaseModel):
    """AMP solver settings."""
    model_config = ConfigDict(frozen=True)

    lambda_pen: float = Field(..., ge=0.0, description="Regularization parameter")
    damping: float = Field(0.2, ge=0.0, lt=1.0, description="Fraction of the previous iterate retained")
    damped_variables: Tuple[str, ...] = Field(("x_hat", "chi"), description="Variables the damping applies to")
    max_iter: int = Field(1000, ge=1)
    mse_stop: float = Field(1e-10, ge=0.0, description="Stop when MSE vs ground truth falls below this")
    iterate_tol: float = Field(1e-10, gt=0.0, description="Relative iterate-change stop without ground truth")
    divergence_mse: float = Field(1e6, gt=0.0, description="MSE above which a run is declared diverged")
    penalty: PenaltySpec = Field(default_factory=PenaltySpec)

    @field_validator("damped_variables")
    @classmethod
    def _known_variables(cls, value):
        unknown = set(value) - {"x_hat", "chi"}
        if unknown:
            raise ValueError(f"cannot damp {sorted(unknown)}; choose from x_hat, chi")
        return tuple(value)


class AmpState(BaseModel):
    """AMP iterate."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    x_hat: np.ndarray
    z: np.ndarray
    chi: float = Field(..., ge=0.0)
    iter: int = Field(0, ge=0)


class AmpRecord(BaseModel):
    """One completed AMP iteration."""
    iter: int
    mse: Optional[float] = None
    chi: float
    lambda_prox: float


class AmpTrace(BaseModel):
    """Per-iteration history and outcome of an AMP run."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    records: List[AmpRecord] = Field(default_factory=list)
    final_state: AmpState
    termination: AmpTermination

    @property
    def final_mse(self) -> Optional[float]:
        return self.records[-1].mse if self.records else None

    def to_rows(self) -> List[dict]:
        """Rows for CSV export; termination appears on the final row only."""
        rows = []
        for i, record in enumerate(self.records):
            row = record.model_dump()
            row["termination"] = self.termination.value if i == len(self.records) - 1 else ""
            rows.append(row)
        return rows


# --- State evolution -------------------------------------------------------

class QuadratureConfig(BaseModel):
    """Adaptive Gauss-Kronrod settings."""
    model_config = ConfigDict(frozen=True)

    abs_tol: float = Field(1e-10, gt=0.0)
    rel_tol: float = Field(1e-8, gt=0.0)
    tail_cut: float = Field(12.0, gt=0.0, description="Truncation of the Gaussian in standard deviations")
    max_subdivisions: int = Field(200, ge=1, description="Subinterval budget")


class SeConfig(BaseModel):
    """State-evolution settings."""
    model_config = ConfigDict(frozen=True)

    alpha: float = Field(..., gt=0.0)
    rho: float = Field(..., ge=0.0, le=1.0)
    sigma2: float = Field(0.0, ge=0.0)
    lambda_pen: float = Field(0.0, ge=0.0)
    damping: float = Field(0.2, ge=0.0, lt=1.0)
    max_iter: int = Field(1000, ge=1)
    mse_stop: float = Field(1e-10, ge=0.0)
    fixed_point_tol: float = Field(1e-12, gt=0.0)
    penalty: PenaltySpec = Field(default_factory=PenaltySpec)
    quad: QuadratureConfig = Field(default_factory=QuadratureConfig)
    l1_closed_form: bool = Field(True, description="Use the erfc expressions for L1")
    noise_over_alpha: bool = Field(
        True,
        description="Effective variance (sigma2 + E) / alpha, the one AMP sees with A ~ N(0, 1/N); "
                    "False uses sigma2 + E / alpha",
    )


class SeState(BaseModel):
    """Scalar order parameters of the SE recursion."""
    model_config = ConfigDict(frozen=True)

    e: float = Field(..., ge=0.0)
    chi: float = Field(..., ge=0.0)
    iter: int = Field(0, ge=0)


class SeStatus(str, Enum):
    FIXED_POINT = "FixedPoint"
    MSE_STOP = "MseStop"
    MAX_ITER = "MaxIter"
    QUADRATURE_FAILURE = "QuadratureFailure"
    DIVERGED = "Diverged"


class SeRecord(BaseModel):
    iter: int
    e: float
    chi: float
    k: float
    lambda_prox: float


class SeResult(BaseModel):
    """Final state and trajectory of run_se."""
    state: SeState
    trace: List[SeRecord] = Field(default_factory=list)
    status: SeStatus
    failed_iteration: Optional[int] = None
    message: str = ""


# --- ADMM ------------------------------------------------------------------

class AdmmMode(str, Enum):
    NOISY = "noisy"
    NOISELESS = "noiseless"


class AdmmTermination(str, Enum):
    BOTH_MET = "BothMet"
    PRIMAL_MET = "PrimalMet"
    DUAL_MET = "DualMet"
    MAX_ITER = "MaxIter"
    MSE_STOP = "MseStop"
    DIVERGED = "Diverged"


class AdmmConfig(BaseModel):
    """ADMM solver settings."""
    model_config = ConfigDict(frozen=True)

    lambda_pen: float = Field(0.0, ge=0.0)
    rho_admm0: float = Field(1.0, gt=0.0, description="Initial ADMM penalty parameter")
    alpha_relax: float = Field(0.5, gt=0.0, lt=2.0, description="Over-relaxation (noisy mode)")
    rho_growth: Optional[float] = Field(None, ge=1.0, description="Per-iteration rho multiplier (noiseless mode)")
    max_iter: int = Field(1000, ge=1)
    tol_primal: float = Field(1e-10, gt=0.0)
    tol_dual: float = Field(1e-10, gt=0.0)
    mse_stop: float = Field(1e-4, ge=0.0, description="Noiseless stop on MSE vs ground truth")
    penalty: PenaltySpec = Field(default_factory=PenaltySpec)
    mode: AdmmMode = AdmmMode.NOISY

    @model_validator(mode="before")
    @classmethod
    def _default_growth(cls, data):
        if isinstance(data, dict) and data.get("rho_growth") is None:
            noiseless = AdmmMode(data.get("mode", AdmmMode.NOISY)) == AdmmMode.NOISELESS
            data = {**data, "rho_growth": 1.01 if noiseless else 1.0}
        return data

    @model_validator(mode="after")
    def _check_growth(self):
        if self.mode == AdmmMode.NOISY and self.rho_growth != 1.0:
            raise ValueError("noisy ADMM keeps rho_admm fixed; rho_growth must be 1")
        return self


class AdmmState(BaseModel):
    """ADMM iterate with scaled dual."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    x: np.ndarray
    z: np.ndarray
    u: np.ndarray
    rho_admm: float = Field(..., gt=0.0)
    iter: int = Field(0, ge=0)


class AdmmRecord(BaseModel):
    iter: int
    mse: Optional[float] = None
    primal_residual: float
    dual_residual: float
    rho_admm: float


class AdmmTrace(BaseModel):
    """Per-iteration history and outcome of an ADMM run."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    records: List[AdmmRecord] = Field(default_factory=list)
    final_state: AdmmState
    termination: AdmmTermination
    factorizations: int = 0

    @property
    def x_hat(self) -> np.ndarray:
        """The reconstruction is the sparse z iterate."""
        return self.final_state.z

    @property
    def final_mse(self) -> Optional[float]:
        return self.records[-1].mse if self.records else None

    def to_rows(self) -> List[dict]:
        return [record.model_dump() for record in self.records]
