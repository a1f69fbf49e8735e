"""
Result containers returned by the solvers, the demography and substitution
modules and the simulators. Tables hold numpy arrays and are frozen once built.
"""

from typing import Iterator, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from diploid_vortex.core.lattice import TruncatedLattice
from diploid_vortex.exceptions import TableRangeError
from diploid_vortex.types.enums import (
    Absorption,
    Coupling,
    MicroEventKind,
    TablesSource,
    TauMethod,
)
from diploid_vortex.types.models import DemographicParams, GeneralRates, PopulationState

_ARRAYS = ConfigDict(arbitrary_types_allowed=True, frozen=True)


class FixationTable(BaseModel):
    """Fixation probability of allele a on every state of a truncated lattice."""

    lattice: TruncatedLattice
    u: np.ndarray
    rates: GeneralRates
    params: Optional[DemographicParams] = None
    truncation_error_estimate: float
    residual: float
    solver: str

    model_config = _ARRAYS

    def value(self, state: PopulationState) -> float:
        return float(self.u[self.lattice.index_of(state)])

    def rows(self) -> Iterator[tuple[int, int, int, float]]:
        lat = self.lattice
        for i in range(lat.size):
            yield int(lat.k[i]), int(lat.m[i]), int(lat.n[i]), float(self.u[i])


class HittingTimeTable(BaseModel):
    """Expected number of jump-chain steps to reach either absorbing set."""

    lattice: TruncatedLattice
    t: np.ndarray
    rates: GeneralRates
    residual: float

    model_config = _ARRAYS

    def value(self, state: PopulationState) -> float:
        return float(self.t[self.lattice.index_of(state)])


class DerivativeTable(BaseModel):
    """v and v' (negated first derivatives of u at the neutral point) on a lattice."""

    lattice: TruncatedLattice
    v: np.ndarray
    vprime: np.ndarray
    params: DemographicParams
    method: str
    step: Optional[float] = None
    residual: float = 0.0

    model_config = _ARRAYS

    def value(self, state: PopulationState) -> tuple[float, float]:
        i = self.lattice.index_of(state)
        return float(self.v[i]), float(self.vprime[i])


class SolverDiagnostics(BaseModel):
    """Per-level norms of the first recurrence layer and tail/residual bookkeeping."""

    levels: np.ndarray
    norm_k: np.ndarray
    norm_g: np.ndarray
    m_inv_ratio: np.ndarray = Field(..., description="||M_N^-1|| * cN / (2b)")
    cond_f: np.ndarray
    g_vectors: np.ndarray = Field(..., description="g_N, one row per level")
    tail_residual: float
    l_used: int
    l_max: int
    recurrence_residual: float
    prime_tail_residual: float = 0.0
    prime_l_used: int = 0
    prime_recurrence_residual: float = 0.0

    model_config = _ARRAYS

    def rows(self) -> Iterator[tuple[int, float, float, float]]:
        for i, level in enumerate(self.levels):
            yield int(level), float(self.norm_k[i]), float(self.norm_g[i]), float(self.cond_f[i])


class RecurrenceResiduals(BaseModel):
    """Largest absolute residual of each recurrence, with the level where it occurs."""

    first_start: float
    first_layer: float
    first_worst_level: int
    second_start: float
    second_layer: float
    second_worst_level: int

    model_config = ConfigDict(frozen=True)

    @property
    def worst(self) -> float:
        return max(self.first_start, self.first_layer, self.second_start, self.second_layer)


class AsymptoticFit(BaseModel):
    """Least-squares fit y_N ~ c1 / N + c2 / N^2 over a range of levels."""

    c1: float
    c2: float
    relative_residual: float
    lo: int
    hi: int

    model_config = ConfigDict(frozen=True)


class PerturbationTables(BaseModel):
    """
    x_N, y_N, x'_N, y'_N indexed directly by N. Entries at N = 2 of the
    first layer hold the split (s2 - 1.5 * y2_split, y2_split); only s2 is
    determined.
    """

    params: DemographicParams
    n_max: int
    x: np.ndarray
    y: np.ndarray
    xp: np.ndarray
    yp: np.ndarray
    s2: float
    y2_split: float = 0.0
    source: TablesSource
    diagnostics: Optional[SolverDiagnostics] = None

    model_config = _ARRAYS

    def require(self, size: int) -> None:
        if not 2 <= size <= self.n_max:
            raise TableRangeError(size, 2, self.n_max, "perturbation tables")

    def rows(self) -> Iterator[tuple[int, float, float, float, float]]:
        for size in range(2, self.n_max + 1):
            yield (
                size,
                float(self.x[size]),
                float(self.y[size]),
                float(self.xp[size]),
                float(self.yp[size]),
            )


class StationaryLaw(BaseModel):
    """Truncated stationary law of the monomorphic population size, support 2..n_max."""

    b: float
    d: float
    c: float
    n_max: int
    probs: np.ndarray
    log_probs: np.ndarray
    tail_mass: float
    mean: float

    model_config = _ARRAYS

    @property
    def support(self) -> np.ndarray:
        return np.arange(2, self.n_max + 1)

    def prob(self, size: int) -> float:
        if 2 <= size <= self.n_max:
            return float(self.probs[size - 2])
        return 0.0

    def balance_residuals(self) -> np.ndarray:
        """
        Relative residuals of the stationary balance: the boundary equation at
        N = 2 first, then the interior equations 3 <= N <= n_max - 1.
        """
        b, d, c = self.b, self.d, self.c
        p = self.probs
        sizes = np.arange(3, self.n_max, dtype=np.float64)
        boundary = 2 * b * p[0] - 3 * (d + 2 * c) * p[1]
        boundary_scale = 2 * b * p[0] + 3 * (d + 2 * c) * p[1]
        lhs = b * (sizes - 1) * p[:-2] + (d + c * sizes) * (sizes + 1) * p[2:]
        rhs = sizes * (b + d + c * (sizes - 1)) * p[1:-1]
        interior = np.abs(lhs - rhs) / np.maximum(np.abs(lhs) + np.abs(rhs), np.finfo(float).tiny)
        return np.concatenate([[abs(boundary) / boundary_scale], interior])

    def rows(self) -> Iterator[tuple[int, float]]:
        for i, p in enumerate(self.probs):
            yield i + 2, float(p)


class Crossing(BaseModel):
    """Single-crossing comparison of two stationary laws at death rates d < d'."""

    n0: int
    ratios: np.ndarray = Field(..., description="q(N) = l(N, d') / l(N, d) from N = 2")
    strictly_decreasing: bool
    sign_changes: int

    model_config = _ARRAYS


class SubstitutionRate(BaseModel):
    """Jump rate tau of the substitution process and mean waiting time T = 1/tau."""

    tau: float
    T: float
    method: TauMethod
    params: DemographicParams
    mu: float
    tol: float
    n_terms: int

    model_config = ConfigDict(frozen=True)


class VortexRow(BaseModel):
    d: float
    tau: float
    T: float

    model_config = ConfigDict(frozen=True)


class VortexCurve(BaseModel):
    """Mean fixation time as a function of the intrinsic death rate d."""

    rows: tuple[VortexRow, ...]
    b: float
    c: float
    delta: float
    delta_prime: float
    mu: float
    method: TauMethod

    model_config = ConfigDict(frozen=True)

    @field_validator("rows")
    @classmethod
    def validate_increasing(cls, v: tuple[VortexRow, ...]) -> tuple[VortexRow, ...]:
        if any(b.d <= a.d for a, b in zip(v, v[1:])):
            raise ValueError("d must be strictly increasing across rows")
        return v

    @property
    def strictly_decreasing(self) -> bool:
        return all(b.T < a.T for a, b in zip(self.rows, self.rows[1:]))


class FixationEstimate(BaseModel):
    """Monte Carlo fixation frequency with a normal-approximation 99% interval."""

    estimate: float
    ci_halfwidth_99: float
    reps: int
    fixed: int
    lost: int
    censored: int

    model_config = ConfigDict(frozen=True)

    def contains(self, value: float) -> bool:
        return abs(value - self.estimate) <= self.ci_halfwidth_99


class AbsorptionOutcome(BaseModel):
    absorbed_in: Absorption
    final_state: PopulationState
    events: int
    time: float

    model_config = ConfigDict(frozen=True)


class MeltdownStep(BaseModel):
    index: int
    d: float
    tau: float
    waiting_time: float = Field(..., gt=0)

    model_config = ConfigDict(frozen=True)


class MeltdownTrajectory(BaseModel):
    """Successive fixations of deleterious mutations; d_j = d0 + j * delta_prime."""

    steps: tuple[MeltdownStep, ...]
    seed: int
    stream_id: int
    coupling: Coupling
    method: TauMethod

    model_config = ConfigDict(frozen=True)

    @property
    def waiting_times(self) -> list[float]:
        return [s.waiting_time for s in self.steps]


class MeltdownSummary(BaseModel):
    """Waiting times pooled over many seeds, per fixation index."""

    d: tuple[float, ...]
    mean: tuple[float, ...]
    std_error: tuple[float, ...]
    expected: tuple[float, ...] = Field(..., description="1 / tau_j")
    replicates: int
    coupling: Coupling

    model_config = ConfigDict(frozen=True)

    @property
    def strictly_decreasing(self) -> bool:
        return all(b < a for a, b in zip(self.mean, self.mean[1:]))

    def z_scores(self) -> list[float]:
        return [
            (m - e) / s if s > 0 else 0.0
            for m, e, s in zip(self.mean, self.expected, self.std_error)
        ]


class MicroEvent(BaseModel):
    time: float
    kind: MicroEventKind
    mutation_id: int = -1
    size: int

    model_config = ConfigDict(frozen=True)


class MicroRun(BaseModel):
    """Outcome of a microscopic run with per-strand mutations."""

    events: tuple[MicroEvent, ...]
    occupancy: dict[int, float] = Field(
        ..., description="Time spent at each size while no mutation segregates"
    )
    monomorphic_time: float
    first_mutation_time: Optional[float] = None
    fixations: int
    losses: int
    mutations: int
    final_size: int
    t_end: float
    seed: int

    model_config = ConfigDict(frozen=True)

    def occupancy_distribution(self) -> dict[int, float]:
        total = sum(self.occupancy.values())
        if total <= 0:
            return {}
        return {size: t / total for size, t in sorted(self.occupancy.items())}


class MonotonicityCheck(BaseModel):
    """w at sample states under two death rates d < d'; w should not increase with d."""

    d: float
    d_prime: float
    states: tuple[PopulationState, ...]
    w_d: tuple[float, ...]
    w_d_prime: tuple[float, ...]

    model_config = ConfigDict(frozen=True)

    @property
    def decreasing(self) -> tuple[bool, ...]:
        return tuple(b <= a for a, b in zip(self.w_d, self.w_d_prime))

    @property
    def holds(self) -> bool:
        return all(self.decreasing)


class PivotDecomposition(BaseModel):
    """
    First-order change of the substitution bracket between d and d', computed
    directly and through the split at the crossing size n0.
    """

    d: float
    d_prime: float
    n0: int
    raw: float
    level_term: float = Field(..., description="sum N l(N, d) (w(d) - w(d'))")
    crossing_term: float = Field(
        ..., description="sum (W(N, d') - W(n0, d')) (l(N, d') - l(N, d))"
    )
    relative_gap: float

    model_config = ConfigDict(frozen=True)

    @property
    def pivoted(self) -> float:
        return self.level_term - self.crossing_term
