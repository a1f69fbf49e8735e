"""
Numerical failure exceptions.
"""

from typing import Any, Dict, Optional

from diploid_vortex.exceptions.base import DiploidVortexError


class NumericalError(DiploidVortexError):
    """Base exception for numerical failures (exit code 2)."""

    exit_code = 2


class SingularSystemError(NumericalError):
    """Raised when a matrix is singular or too ill-conditioned to invert."""

    def __init__(self, what: str, details: Optional[Dict[str, Any]] = None):
        self.what = what
        super().__init__(
            f"Singular or ill-conditioned system: {what}",
            code="SINGULAR_SYSTEM",
            details=details or {"what": what},
        )


class SolverNotConvergedError(NumericalError):
    """Raised when a lattice solve misses its residual target."""

    def __init__(self, residual: float, target: float, method: str):
        self.residual = residual
        self.target = target
        super().__init__(
            f"Linear solve did not reach residual {target:.3e} (got {residual:.3e})",
            code="SOLVER_NOT_CONVERGED",
            details={"residual": residual, "target": target, "method": method},
        )


class TailNotConvergedError(NumericalError):
    """Raised when the backward tail summation does not contract within L_max."""

    def __init__(self, level: int, l_max: int, estimate: float):
        self.level = level
        self.l_max = l_max
        self.estimate = estimate
        super().__init__(
            f"Tail summation did not contract by level {level} (L_max={l_max})",
            code="TAIL_NOT_CONVERGED",
            details={"level": level, "l_max": l_max, "estimate": estimate},
        )


class RecurrenceResidualError(NumericalError):
    """Raised when computed tables fail to satisfy their recurrence."""

    def __init__(self, layer: str, residual: float, tol: float, level: int):
        self.layer = layer
        self.residual = residual
        super().__init__(
            f"{layer} recurrence residual {residual:.3e} exceeds {tol:.3e} at N={level}",
            code="RECURRENCE_RESIDUAL",
            details={"layer": layer, "residual": residual, "tol": tol, "level": level},
        )
