"""
Sparse linear solves for the lattice Dirichlet problems.

Small systems are factorised once with SuperLU and reused for every right-hand
side; larger ones use an incomplete-LU preconditioned BiCGSTAB, which falls back
to SuperLU if it breaks down or stalls. Both paths finish with iterative
refinement and a normwise backward-error check.
"""

from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator, bicgstab, spilu, splu

from diploid_vortex.config.settings import SolverSettings, get_settings
from diploid_vortex.exceptions import SingularSystemError, SolverNotConvergedError
from diploid_vortex.logging import get_logger

logger = get_logger(__name__)


class SparseSolver:
    """Reusable solver for one sparse system ``A x = b``."""

    def __init__(self, matrix: sp.spmatrix, config: Optional[SolverSettings] = None):
        self.config = config or get_settings().solver
        self.matrix = sp.csr_matrix(matrix)
        self.size = self.matrix.shape[0]
        self.norm = float(abs(self.matrix).sum(axis=1).max()) if self.size else 0.0

        if self.size <= self.config.direct_max_states:
            self._factorise()
        else:
            self.method = "ilu-bicgstab"
            try:
                ilu = spilu(
                    self.matrix.tocsc(),
                    drop_tol=self.config.ilu_drop_tol,
                    fill_factor=self.config.ilu_fill_factor,
                )
            except RuntimeError as e:
                raise SingularSystemError("ILU preconditioner", details={"error": str(e)})
            self._preconditioner = LinearOperator(
                self.matrix.shape, matvec=ilu.solve, dtype=np.float64
            )

        logger.debug(
            "Prepared sparse solver",
            extra={"unknowns": self.size, "nnz": self.matrix.nnz, "method": self.method},
        )

    def _factorise(self) -> None:
        self.method = "splu"
        try:
            self._lu = splu(self.matrix.tocsc())
        except RuntimeError as e:
            raise SingularSystemError("lattice operator", details={"error": str(e)})

    def _fall_back_to_direct(self, reason: str, **extra: object) -> None:
        """Abandon the Krylov path for the rest of this solver's life."""
        logger.warning(
            "Iterative solve failed, switching to sparse LU",
            extra={"reason": reason, "unknowns": self.size, **extra},
        )
        self._factorise()

    def _base_solve(self, rhs: np.ndarray) -> np.ndarray:
        if self.method == "splu":
            return np.asarray(self._lu.solve(rhs), dtype=np.float64)
        x, info = bicgstab(
            self.matrix,
            rhs,
            rtol=0.1 * self.config.residual_tol,
            atol=0.0,
            maxiter=self.config.krylov_maxiter,
            M=self._preconditioner,
        )
        if info < 0:
            self._fall_back_to_direct("breakdown", info=info)
            return self._base_solve(rhs)
        if info > 0:
            logger.debug("BiCGSTAB hit its iteration cap", extra={"iterations": info})
        return np.asarray(x, dtype=np.float64)

    def backward_error(self, x: np.ndarray, rhs: np.ndarray) -> float:
        residual = rhs - self.matrix @ x
        scale = self.norm * float(np.max(np.abs(x), initial=0.0)) + float(
            np.max(np.abs(rhs), initial=0.0)
        )
        if scale == 0.0:
            return 0.0
        return float(np.max(np.abs(residual), initial=0.0)) / scale

    def _refined(self, rhs: np.ndarray) -> tuple[np.ndarray, float]:
        x = self._base_solve(rhs)
        error = self.backward_error(x, rhs)
        for _ in range(self.config.refinement_steps):
            if error <= self.config.residual_tol:
                break
            x = x + self._base_solve(rhs - self.matrix @ x)
            error = self.backward_error(x, rhs)
        return x, error

    def solve(self, rhs: np.ndarray) -> tuple[np.ndarray, float]:
        """
        Solve for one right-hand side.

        An iterative solve that breaks down or stalls above ``residual_tol``
        after refinement is repeated with a sparse LU factorisation.

        Returns:
            The solution and its normwise backward error
        """
        rhs = np.asarray(rhs, dtype=np.float64)
        if self.size == 0:
            return np.zeros(0), 0.0
        if not np.any(rhs):
            return np.zeros_like(rhs), 0.0

        x, error = self._refined(rhs)
        converged = bool(np.all(np.isfinite(x))) and error <= self.config.residual_tol
        if not converged and self.method != "splu":
            self._fall_back_to_direct("stalled", backward_error=error)
            x, error = self._refined(rhs)

        if not np.all(np.isfinite(x)) or error > self.config.residual_tol:
            raise SolverNotConvergedError(error, self.config.residual_tol, self.method)
        return x, error
