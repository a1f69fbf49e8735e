"""
Logging helpers.
"""

from diploid_vortex.logging.logger import (
    RunContext,
    StandardStreamHandler,
    VortexJsonFormatter,
    VortexLoggerAdapter,
    VortexTextFormatter,
    get_event_logger,
    get_logger,
    setup_logging,
    timed_operation,
)

__all__ = [
    "RunContext",
    "StandardStreamHandler",
    "VortexJsonFormatter",
    "VortexLoggerAdapter",
    "VortexTextFormatter",
    "get_event_logger",
    "get_logger",
    "setup_logging",
    "timed_operation",
]
