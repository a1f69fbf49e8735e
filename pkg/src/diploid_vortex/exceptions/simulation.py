"""
Simulation-related exceptions.
"""

from diploid_vortex.exceptions.base import DiploidVortexError


class SimulationError(DiploidVortexError):
    """Base exception for simulation failures (exit code 2)."""

    exit_code = 2


class CensoringLimitExceeded(SimulationError):
    """Raised when too many replicates hit the event cap."""

    def __init__(self, censored: int, reps: int, limit: float):
        self.censored = censored
        self.reps = reps
        super().__init__(
            f"{censored} of {reps} replicates censored (limit {limit:.2%})",
            code="CENSORING_LIMIT",
            details={"censored": censored, "reps": reps, "limit": limit},
        )


class PopulationCapExceeded(SimulationError):
    """Raised when the microscopic population grows past its hard cap."""

    def __init__(self, size: int, cap: int, time: float):
        self.size = size
        super().__init__(
            f"Population size {size} exceeded cap {cap} at t={time:.6g}",
            code="POPULATION_CAP",
            details={"size": size, "cap": cap, "time": time},
        )


class NonPositiveRateError(SimulationError):
    """Raised when a substitution rate used for sampling is not positive."""

    def __init__(self, index: int, rate: float):
        self.index = index
        self.rate = rate
        super().__init__(
            f"Substitution rate {rate!r} at fixation {index} is not positive",
            code="NON_POSITIVE_RATE",
            details={"index": index, "rate": rate},
        )
