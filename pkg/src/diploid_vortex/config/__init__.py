"""
Runtime configuration.
"""

from diploid_vortex.config.settings import (
    CacheConfig,
    LoggingConfig,
    SimulationSettings,
    SolverSettings,
    VortexSettings,
    get_settings,
    reload_settings,
)

__all__ = [
    "CacheConfig",
    "LoggingConfig",
    "SimulationSettings",
    "SolverSettings",
    "VortexSettings",
    "get_settings",
    "reload_settings",
]
