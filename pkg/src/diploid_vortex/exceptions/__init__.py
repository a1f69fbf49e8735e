"""
Exception hierarchy for diploid-vortex.
"""

from diploid_vortex.exceptions.base import (
    DiploidVortexError,
    ValidationFailure,
    VerificationFailedError,
)
from diploid_vortex.exceptions.model import (
    InvalidGridError,
    InvalidParametersError,
    LatticeTooSmallError,
    OverdominanceError,
    TableRangeError,
)
from diploid_vortex.exceptions.numerical import (
    NumericalError,
    RecurrenceResidualError,
    SingularSystemError,
    SolverNotConvergedError,
    TailNotConvergedError,
)
from diploid_vortex.exceptions.simulation import (
    CensoringLimitExceeded,
    NonPositiveRateError,
    PopulationCapExceeded,
    SimulationError,
)

__all__ = [
    "DiploidVortexError",
    "ValidationFailure",
    "VerificationFailedError",
    "InvalidParametersError",
    "OverdominanceError",
    "InvalidGridError",
    "TableRangeError",
    "LatticeTooSmallError",
    "NumericalError",
    "SingularSystemError",
    "SolverNotConvergedError",
    "TailNotConvergedError",
    "RecurrenceResidualError",
    "SimulationError",
    "CensoringLimitExceeded",
    "PopulationCapExceeded",
    "NonPositiveRateError",
]
