"""
Input validation exceptions: parameters, grids, table ranges.
"""

from typing import Any, Dict, Optional

from diploid_vortex.exceptions.base import ValidationFailure


class InvalidParametersError(ValidationFailure):
    """Raised when demographic parameters violate an operation's precondition."""

    def __init__(self, reason: str, details: Optional[Dict[str, Any]] = None):
        self.reason = reason
        super().__init__(
            f"Invalid parameters: {reason}",
            code="INVALID_PARAMETERS",
            details=details or {"reason": reason},
        )


class OverdominanceError(ValidationFailure):
    """Raised for heterozygote penalties at or above the homozygote penalty."""

    def __init__(self, delta: float, delta_prime: float):
        self.delta = delta
        self.delta_prime = delta_prime
        super().__init__(
            f"Overdominance excluded: delta={delta} must be below delta_prime={delta_prime}",
            code="OVERDOMINANCE",
            details={"delta": delta, "delta_prime": delta_prime},
        )


class InvalidGridError(ValidationFailure):
    """Raised when a start:stop:step grid cannot be parsed or is not increasing."""

    def __init__(self, spec: str, reason: str):
        self.spec = spec
        super().__init__(
            f"Invalid grid '{spec}': {reason}",
            code="INVALID_GRID",
            details={"grid": spec, "reason": reason},
        )


class TableRangeError(ValidationFailure):
    """Raised when a table is queried outside the population sizes it covers."""

    def __init__(self, size: int, lowest: int, highest: int, table: str = "table"):
        self.size = size
        super().__init__(
            f"Population size {size} outside {table} range [{lowest}, {highest}]",
            code="TABLE_RANGE",
            details={"size": size, "lowest": lowest, "highest": highest, "table": table},
        )


class LatticeTooSmallError(ValidationFailure):
    """Raised for truncation levels below the smallest supported lattice."""

    def __init__(self, n_max: int, minimum: int = 4):
        self.n_max = n_max
        super().__init__(
            f"N_max={n_max} is below the minimum {minimum}",
            code="LATTICE_TOO_SMALL",
            details={"n_max": n_max, "minimum": minimum},
        )
