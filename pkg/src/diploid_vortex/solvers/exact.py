"""
Exact Dirichlet problems on the truncated lattice.

The jump chain of the three-type process is assembled once per parameter set
(births switched off at N = N_max) and the interior unknowns are solved for:

- the fixation probability u, equal to 1 on Gamma_a and 0 on Gamma_A;
- the expected number of jumps before absorption;
- v and v', obtained by differentiating the generator at the neutral point;
- central finite differences of u in delta and delta'.
"""

from typing import Optional, TextIO

import numpy as np
import scipy.sparse as sp

from diploid_vortex.config.settings import get_settings
from diploid_vortex.core.lattice import TruncatedLattice, lattice_size
from diploid_vortex.core.model import Rates, as_general, event_rate_arrays, neutral_fixation
from diploid_vortex.exceptions import InvalidParametersError, SingularSystemError
from diploid_vortex.logging import get_logger, timed_operation
from diploid_vortex.solvers.linear import SparseSolver
from diploid_vortex.types.enums import EVENT_SHIFTS
from diploid_vortex.types.models import DemographicParams, GeneralRates, PopulationState
from diploid_vortex.types.results import DerivativeTable, FixationTable, HittingTimeTable
from diploid_vortex.utils.cache import table_cache
from diploid_vortex.utils.csvio import write_rows

logger = get_logger(__name__)

__all__ = [
    "DirichletSystem",
    "neutral_fixation",
    "solve_fixation",
    "solve_fixation_general",
    "solve_mean_steps",
    "solve_derivatives",
    "fd_gradient",
    "fd_gradient_table",
    "default_fd_step",
    "write_fixation_csv",
]


class DirichletSystem:
    """
    Jump chain P on a truncated lattice and the interior operator I - P_II.

    The factorisation is built lazily and shared by every right-hand side.
    """

    def __init__(self, lattice: TruncatedLattice, rates: GeneralRates):
        self.lattice = lattice
        self.rates = rates

        k, m, n = lattice.k, lattice.m, lattice.n
        event = event_rate_arrays(k, m, n, rates)
        event[:3, lattice.N >= lattice.n_max] = 0.0
        self.total = event.sum(axis=0)

        self.interior = np.flatnonzero(lattice.interior)
        if np.any(self.total[self.interior] <= 0.0):
            raise SingularSystemError("interior state with zero total jump rate")

        rows, cols, vals = [], [], []
        for e, (dk, dm, dn) in enumerate(EVENT_SHIFTS):
            src = np.flatnonzero(event[e] > 0.0)
            rows.append(src)
            cols.append(lattice.index_array(k[src] + dk, m[src] + dm, n[src] + dn))
            vals.append(event[e, src] / self.total[src])
        self.jump = sp.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(lattice.size, lattice.size),
        )

        block = self.jump[self.interior]
        self.to_interior = block[:, self.interior]
        self.to_fixed = np.asarray(
            block[:, np.flatnonzero(lattice.gamma_fixed)].sum(axis=1)
        ).ravel()
        self._solver: Optional[SparseSolver] = None

    @property
    def solver(self) -> SparseSolver:
        if self._solver is None:
            operator = sp.identity(len(self.interior), format="csr") - self.to_interior
            self._solver = SparseSolver(operator)
        return self._solver

    def extend(self, interior_values: np.ndarray, boundary_fixed: float = 0.0) -> np.ndarray:
        """Full-lattice vector: interior solution, ``boundary_fixed`` on Gamma_a, 0 on Gamma_A."""
        out = np.zeros(self.lattice.size)
        out[self.lattice.gamma_fixed] = boundary_fixed
        out[self.interior] = interior_values
        return out

    def solve_interior(self, rhs: np.ndarray) -> tuple[np.ndarray, float]:
        return self.solver.solve(rhs)


def _system(rates: GeneralRates, n_max: int) -> DirichletSystem:
    def build() -> DirichletSystem:
        return DirichletSystem(TruncatedLattice(n_max), rates)

    # iterative-path systems are too large to keep around
    if lattice_size(n_max) > get_settings().solver.direct_max_states:
        return build()
    return table_cache().get_or_compute(("system", rates, n_max), build)


def _dominating_tail_estimate(rates: GeneralRates, n_max: int) -> float:
    """
    Mass of the dominating logistic law beyond N_max relative to its mass on
    sizes up to N_max/2, with fecundity max b_ij, death min d_i and competition
    min c_ij. Used when no refinement solve is requested.
    """
    b = rates.max_birth
    if b == 0.0:
        return 0.0
    d = min(rates.d)
    c = min(min(row) for row in rates.c)
    sizes = np.arange(2, 4 * n_max + 1, dtype=np.float64)
    steps = np.log(b) - np.log(d + c * sizes[:-1])
    log_w = -np.log(sizes) + np.concatenate([[0.0], np.cumsum(steps)])
    half = n_max // 2
    head = log_w[: half - 1]
    tail = log_w[n_max - 2 :]
    top = max(head.max(), tail.max())
    ratio = np.exp(tail - top).sum() / np.exp(head - top).sum()
    return float(min(1.0, ratio))


def _fixation(
    rates: GeneralRates, n_max: int, refine: bool
) -> tuple[DirichletSystem, np.ndarray, float, float]:
    system = _system(rates, n_max)
    interior, residual = system.solve_interior(system.to_fixed)
    u = system.extend(interior, boundary_fixed=1.0)

    if refine:
        finer = _system(rates, 2 * n_max)
        fine_interior, _ = finer.solve_interior(finer.to_fixed)
        u_fine = finer.extend(fine_interior, boundary_fixed=1.0)
        cut = system.lattice.offset(n_max // 2 + 1)
        estimate = float(np.max(np.abs(u[:cut] - u_fine[:cut])))
    else:
        estimate = _dominating_tail_estimate(rates, n_max)
    return system, u, residual, estimate


@timed_operation("solve_fixation")
def solve_fixation_general(
    rates: Rates, n_max: int, refine: bool = False
) -> FixationTable:
    """Fixation probability of allele a for arbitrary genotype-dependent rates."""
    general = as_general(rates)
    system, u, residual, estimate = _fixation(general, n_max, refine)
    method = system.solver.method
    logger.info(
        "Solved fixation probabilities",
        extra={"n_max": n_max, "solver": method, "residual": residual, "truncation": estimate},
    )
    return FixationTable(
        lattice=system.lattice,
        u=u,
        rates=general,
        params=rates if isinstance(rates, DemographicParams) else None,
        truncation_error_estimate=estimate,
        residual=residual,
        solver=method,
    )


def solve_fixation(
    params: DemographicParams, n_max: int, refine: bool = False
) -> FixationTable:
    """
    Solve the Dirichlet problem for u on {2 <= N <= n_max}.

    Args:
        params: Demographic parameters (delta, delta' included)
        n_max: Truncation level, at least 4
        refine: Also solve at 2 * n_max and report the observed change on
            N <= n_max / 2 as the truncation error estimate
    """
    return table_cache().get_or_compute(
        ("fixation", params, n_max, refine),
        lambda: solve_fixation_general(params, n_max, refine),
    )


@timed_operation("solve_mean_steps")
def solve_mean_steps(rates: Rates, n_max: int) -> HittingTimeTable:
    """Expected number of jumps to reach Gamma_A or Gamma_a from every state."""
    general = as_general(rates)
    system = _system(general, n_max)
    interior, residual = system.solve_interior(np.ones(len(system.interior)))
    return HittingTimeTable(
        lattice=system.lattice, t=system.extend(interior), rates=general, residual=residual
    )


def derivative_sources(lattice: TruncatedLattice) -> tuple[np.ndarray, np.ndarray]:
    """
    Right-hand sides of L0 v and L0 v' on every state; both vanish at N = 2,
    where no death occurs.
    """
    k = lattice.k.astype(np.float64)
    m = lattice.m.astype(np.float64)
    n = lattice.n.astype(np.float64)
    size = lattice.N.astype(np.float64)
    denom = 2.0 * size * np.maximum(size - 1.0, 1.0)
    alive = size >= 3
    source_v = np.where(alive, m * (n - k) / denom, 0.0)
    source_vp = np.where(alive, -n * (2.0 * k + m) / denom, 0.0)
    return source_v, source_vp


@timed_operation("solve_derivatives")
def solve_derivatives(params: DemographicParams, n_max: int) -> DerivativeTable:
    """
    v = -du/d(delta) and v' = -du/d(delta') at the neutral point, each as the
    solution of a linear Dirichlet problem with zero boundary values.
    """
    neutral = GeneralRates.from_params(params.neutral())
    system = _system(neutral, n_max)
    source_v, source_vp = derivative_sources(system.lattice)
    idx = system.interior
    v, res_v = system.solve_interior(-source_v[idx] / system.total[idx])
    vp, res_vp = system.solve_interior(-source_vp[idx] / system.total[idx])
    return DerivativeTable(
        lattice=system.lattice,
        v=system.extend(v),
        vprime=system.extend(vp),
        params=params,
        method="dirichlet",
        residual=max(res_v, res_vp),
    )


def default_fd_step(d: float) -> float:
    return get_settings().solver.fd_step_scale * max(1.0, d)


def _check_step(params: DemographicParams, h: float) -> None:
    if not h > 0:
        raise InvalidParametersError("finite-difference step must be positive", {"h": h})
    if params.d - h < 0:
        raise InvalidParametersError(
            "d - h must be nonnegative so perturbed death rates stay valid",
            {"d": params.d, "h": h},
        )


def _perturbed(params: DemographicParams, h: float, n_max: int) -> list[FixationTable]:
    base = params.neutral()
    shifts = [(h, 0.0), (-h, 0.0), (0.0, h), (0.0, -h)]
    return [solve_fixation(base.with_perturbation(*shift), n_max) for shift in shifts]


def fd_gradient(
    params: DemographicParams,
    state: PopulationState,
    h: Optional[float] = None,
    n_max: int = 60,
) -> tuple[float, float]:
    """Central differences (v_fd, vprime_fd) of -u at the neutral point, for one state."""
    table = fd_gradient_table(params, n_max, h)
    return table.value(state)


def fd_gradient_table(
    params: DemographicParams, n_max: int, h: Optional[float] = None
) -> DerivativeTable:
    """Central differences of -u on the whole lattice (four fixation solves)."""
    step = default_fd_step(params.d) if h is None else h
    _check_step(params, step)
    plus, minus, plus_p, minus_p = _perturbed(params, step, n_max)
    return DerivativeTable(
        lattice=plus.lattice,
        v=-(plus.u - minus.u) / (2.0 * step),
        vprime=-(plus_p.u - minus_p.u) / (2.0 * step),
        params=params,
        method="finite-difference",
        step=step,
    )


def write_fixation_csv(
    table: FixationTable, stream: TextIO, comments: Optional[list[str]] = None
) -> int:
    return write_rows(stream, ("k", "m", "n", "u"), table.rows(), comments)
