"""Application settings and configuration."""
from pydantic_settings import BaseSettings, SettingsConfigDict
from functools import lru_cache
from pathlib import Path


class Settings(BaseSettings):
    """Application settings loaded from environment variables."""

    model_config = SettingsConfigDict(
        # __file__ is sparse_recovery/settings.py, so parent.parent is project root
        env_file=str(Path(__file__).parent.parent / ".env"),
        env_prefix="SPARSE_RECOVERY_",
        case_sensitive=False,
        extra="ignore",
    )

    # Logging
    log_level: str = "INFO"

    # Worker pool
    default_jobs: int = 1

    # Desk-scale experiment defaults (--paper-scale restores the published settings)
    desk_n: int = 500
    desk_grid_size: int = 15
    desk_trials: int = 3
    desk_lambda_points: int = 40
    # best-mse-grid runs a full lambda search per grid point, so it gets smaller sizes
    desk_best_grid_size: int = 5
    desk_best_lambda_points: int = 12

    # Solver defaults shared by AMP, SE and ADMM
    delta_eps: float = 1e-10
    damping: float = 0.2
    max_iter: int = 1000

    # Output
    output_format: str = "csv"


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()
