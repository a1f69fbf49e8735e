"""
Configuration management for diploid-vortex.

Runtime defaults for the lattice solvers, the matrix recurrences, the
simulators and logging. Values come from environment variables
(``DIPLOID_VORTEX_*``); command-line flags always take precedence.
"""

from pydantic import Field, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict
from typing import Any, Dict, Optional

from diploid_vortex.types.enums import LogFormat, LogLevel


class SolverSettings(BaseSettings):
    """Tolerances and sizing rules for the deterministic solvers."""

    tol: float = Field(default=1e-10, description="Recurrence residual tolerance")
    residual_tol: float = Field(
        default=1e-12, description="Relative inf-norm residual for lattice solves"
    )
    fd_step_scale: float = Field(default=1e-3, description="h = scale * max(1, d)")
    direct_max_states: int = Field(
        default=1_000_000, description="Largest interior system solved by sparse LU"
    )
    ilu_drop_tol: float = Field(default=1e-5, description="ILU drop tolerance")
    ilu_fill_factor: float = Field(default=8.0, description="ILU fill factor")
    krylov_maxiter: int = Field(default=2_000, description="BiCGSTAB iteration cap")
    refinement_steps: int = Field(default=3, description="Iterative refinement passes")
    stationary_tol: float = Field(default=1e-12, description="Stationary law tail mass")
    lattice_margin: float = Field(
        default=0.1, description="Extra lattice levels above the stationary support (fraction)"
    )
    lattice_margin_min: int = Field(default=10, description="Minimum extra lattice levels")
    l_max_factor: int = Field(default=10, description="L_max = factor * N_max + offset")
    l_max_offset: int = Field(default=1000, description="L_max = factor * N_max + offset")

    model_config = SettingsConfigDict(
        env_prefix="DIPLOID_VORTEX_SOLVER_",
        case_sensitive=False,
    )

    @field_validator("tol", "residual_tol", "fd_step_scale", "stationary_tol", "ilu_drop_tol")
    @classmethod
    def validate_positive(cls, v: float) -> float:
        """Tolerances must be strictly positive."""
        if not v > 0:
            raise ValueError("tolerances must be positive")
        return v

    @field_validator("direct_max_states", "krylov_maxiter")
    @classmethod
    def validate_counts(cls, v: int) -> int:
        """Validate size limits are at least one."""
        if v < 1:
            raise ValueError("must be at least 1")
        return v

    def l_max(self, n_max: int) -> int:
        """
        Deepest recurrence level the tail summation may reach.

        Args:
            n_max: Highest level the caller needs in its tables
        """
        return self.l_max_factor * n_max + self.l_max_offset

    def lattice_for_support(self, support_max: int) -> int:
        """
        Lattice truncation level covering a stationary support with margin.

        Args:
            support_max: Largest N carrying stationary mass above ``stationary_tol``

        Returns:
            ``support_max`` plus ``lattice_margin`` of it (at least
            ``lattice_margin_min`` levels), never below 8
        """
        margin = max(self.lattice_margin_min, int(self.lattice_margin * support_max + 0.5))
        return max(support_max + margin, 8)


class SimulationSettings(BaseSettings):
    """Configuration for the stochastic simulators."""

    event_cap: int = Field(default=100_000_000, description="Events per replicate")
    max_censored_fraction: float = Field(
        default=0.001, description="Fraction of censored replicates tolerated"
    )
    rng_buffer: int = Field(default=4096, description="Uniforms drawn per refill")
    micro_size_cap: int = Field(default=10_000, description="Microscopic population cap")
    workers: int = Field(default=1, description="Worker processes for replicates")
    seed: int = Field(default=12345, description="Default master seed")

    model_config = SettingsConfigDict(
        env_prefix="DIPLOID_VORTEX_SIM_",
        case_sensitive=False,
    )

    @field_validator("max_censored_fraction")
    @classmethod
    def validate_fraction(cls, v: float) -> float:
        """Validate the censored fraction lies in [0, 1)."""
        if not (0.0 <= v < 1.0):
            raise ValueError("max_censored_fraction must be in [0, 1)")
        return v

    @field_validator("workers", "rng_buffer", "event_cap", "micro_size_cap")
    @classmethod
    def validate_positive_int(cls, v: int) -> int:
        """Validate counts and caps are at least one."""
        if v < 1:
            raise ValueError("must be at least 1")
        return v


class CacheConfig(BaseSettings):
    """Configuration for in-process memoisation of solved tables and laws."""

    enabled: bool = Field(default=True, description="Memoise solved tables")
    max_tables: int = Field(default=8, description="Lattice solutions kept")
    max_laws: int = Field(default=256, description="Stationary laws kept")

    model_config = SettingsConfigDict(
        env_prefix="DIPLOID_VORTEX_CACHE_",
        case_sensitive=False,
    )


class LoggingConfig(BaseSettings):
    """Configuration for logging."""

    level: LogLevel = Field(default=LogLevel.WARNING, description="Log level")
    format: LogFormat = Field(default=LogFormat.TEXT, description="Log format (json, text)")
    output: str = Field(default="stderr", description="Log output (stderr, stdout, file)")
    file_path: Optional[str] = Field(None, description="Log file path")
    max_file_size: int = Field(default=10485760, description="Max log file size (10MB)")
    backup_count: int = Field(default=5, description="Number of backup files")

    model_config = SettingsConfigDict(
        env_prefix="DIPLOID_VORTEX_LOG_",
        case_sensitive=False,
    )

    @field_validator("output")
    @classmethod
    def validate_output(cls, v: str) -> str:
        """Validate log output destination."""
        if v not in ("stderr", "stdout", "file"):
            raise ValueError("output must be stderr, stdout or file")
        return v


class VortexSettings(BaseSettings):
    """Main configuration."""

    solver: SolverSettings = Field(default_factory=SolverSettings)
    simulation: SimulationSettings = Field(default_factory=SimulationSettings)
    cache: CacheConfig = Field(default_factory=CacheConfig)
    logging: LoggingConfig = Field(default_factory=LoggingConfig)

    model_config = SettingsConfigDict(
        env_prefix="DIPLOID_VORTEX_",
        case_sensitive=False,
        extra="ignore",
    )

    @model_validator(mode="after")
    def validate_file_output(self) -> "VortexSettings":
        """File logging needs somewhere to write."""
        if self.logging.output == "file" and not self.logging.file_path:
            self.logging.file_path = "diploid_vortex.log"
        return self

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "VortexSettings":
        """Create settings from dictionary."""
        return cls(**data)

    def to_dict(self) -> Dict[str, Any]:
        """Convert settings to dictionary."""
        return self.model_dump(mode="json")


# Global settings instance
settings = VortexSettings()


def get_settings() -> VortexSettings:
    """Get the active settings."""
    return settings


def reload_settings() -> VortexSettings:
    """Reload settings from environment."""
    global settings
    settings = VortexSettings()
    return settings
