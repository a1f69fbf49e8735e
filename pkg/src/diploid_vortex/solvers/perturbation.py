"""
First-order expansion of the fixation probability around the neutral point:

    u(s; delta, delta') = p(s) - delta * v(s) - delta' * v'(s) + o(|delta| + |delta'|)

v and v' have closed forms in terms of four sequences x_N, y_N, x'_N, y'_N,
which are computed here from the block recurrences, or extracted from the
exact Dirichlet solution when the recurrence tail does not contract.
"""

from dataclasses import dataclass
from typing import Optional, TextIO

import numpy as np

from diploid_vortex.config.settings import get_settings
from diploid_vortex.core.model import neutral_fixation
from diploid_vortex.exceptions import (
    RecurrenceResidualError,
    SingularSystemError,
    TableRangeError,
    TailNotConvergedError,
)
from diploid_vortex.logging import get_logger, timed_operation
from diploid_vortex.solvers.exact import solve_derivatives
from diploid_vortex.solvers.recurrence import (
    Blocks,
    TailSweep,
    first_layer,
    first_layer_start,
    forward_first_layer,
    inv2,
    row_norm,
    second_layer,
    second_layer_start,
    tail_sweep,
    vector_norm,
)
from diploid_vortex.types.enums import TablesSource
from diploid_vortex.types.models import DemographicParams, PopulationState
from diploid_vortex.types.results import (
    AsymptoticFit,
    DerivativeTable,
    PerturbationTables,
    RecurrenceResiduals,
    SolverDiagnostics,
)
from diploid_vortex.utils.cache import table_cache
from diploid_vortex.utils.csvio import write_rows

logger = get_logger(__name__)

MAX_EXTENSIONS = 8


@dataclass(frozen=True)
class ZSolution:
    """x_N, y_N for N = 3..L and the determined combination s2 = x_2 + 1.5 y_2."""

    params: DemographicParams
    n_out: int
    sweep: TailSweep
    s2: float

    @property
    def last_level(self) -> int:
        return self.sweep.last_level

    def x(self, size: int) -> float:
        return float(self.sweep.at(size)[0])

    def y(self, size: int) -> float:
        return float(self.sweep.at(size)[1])


@dataclass(frozen=True)
class ZPrimeSolution:
    """x'_N, y'_N for N = 2..L' under the split y_2 = ``y2``."""

    sweep: TailSweep
    z2: np.ndarray
    y2: float
    h3: np.ndarray
    first: ZSolution

    def at(self, size: int) -> np.ndarray:
        if size == 2:
            return self.z2
        return self.sweep.at(size)


class _FirstLayerTooShort(Exception):
    def __init__(self, level: int):
        self.level = level


def solve_z(
    params: DemographicParams,
    n_out: int,
    tol: Optional[float] = None,
    l_max: Optional[int] = None,
) -> ZSolution:
    """
    Solve the first layer down from a contracting tail.

    Args:
        params: Only b, d and c are used
        n_out: Highest level that must be available (the sweep goes at least one further)
        tol: Recurrence tolerance; defaults to the solver settings
        l_max: Deepest admissible level; defaults to ``l_max_factor * n_out + l_max_offset``
    """
    config = get_settings().solver
    tol = config.tol if tol is None else tol
    l_max = config.l_max(n_out) if l_max is None else l_max

    c_tilde, f_tilde = first_layer_start(params)
    k3 = c_tilde - first_layer(3, params).C
    sweep = tail_sweep(
        lambda size: first_layer(size, params), k3, f_tilde, n_out, tol, l_max, "first"
    )
    x3, y3 = sweep.at(3)
    return ZSolution(
        params=params, n_out=n_out, sweep=sweep, s2=float(4.0 * x3 / 3.0 + 2.0 * y3)
    )


def prime_start(
    params: DemographicParams, z: ZSolution, y2: float = 0.0
) -> tuple[np.ndarray, np.ndarray]:
    """
    (K'_3, h_3) for the split (x_2, y_2) = (s2 - 1.5 y2, y2). h_3 depends on
    the split only through s2.
    """
    x2 = z.s2 - 1.5 * y2
    b_tilde, c_tilde, f_tilde = second_layer_start(x2, y2, z.x(3), z.y(3))
    blocks3 = second_layer(3, params, y2, z.y(3), z.y(4))
    c_inv = inv2(c_tilde, "C~'_2")
    k3 = blocks3.D @ c_inv @ b_tilde
    h3 = blocks3.f - blocks3.D @ c_inv @ f_tilde
    return k3, h3


def _solve_z_prime_once(
    params: DemographicParams, z: ZSolution, tol: float, n_out: int, y2: float
) -> ZPrimeSolution:
    def blocks(size: int) -> Blocks:
        if size + 1 > z.last_level:
            raise _FirstLayerTooShort(size + 1)
        y_prev = y2 if size == 3 else z.y(size - 1)
        return second_layer(size, params, y_prev, z.y(size), z.y(size + 1))

    k3, h3 = prime_start(params, z, y2)
    sweep = tail_sweep(
        blocks, k3, h3, n_out, tol, get_settings().solver.l_max(n_out), "second"
    )
    x2 = z.s2 - 1.5 * y2
    b_tilde, c_tilde, f_tilde = second_layer_start(x2, y2, z.x(3), z.y(3))
    z2 = inv2(c_tilde, "C~'_2") @ (b_tilde @ sweep.at(3) - f_tilde)
    return ZPrimeSolution(sweep=sweep, z2=z2, y2=y2, h3=h3, first=z)


def solve_z_prime(
    params: DemographicParams,
    z: ZSolution,
    tol: Optional[float] = None,
    y2: float = 0.0,
) -> ZPrimeSolution:
    """
    Solve the second layer. The source f'_N needs y_{N+1}; when the primed tail
    runs past the first layer, the first layer is re-solved deeper and the
    returned solution carries it in ``first``.
    """
    tol = get_settings().solver.tol if tol is None else tol
    n_out = z.n_out
    for _ in range(MAX_EXTENSIONS):
        try:
            return _solve_z_prime_once(params, z, tol, n_out, y2)
        except _FirstLayerTooShort as short:
            deeper = max(short.level, 2 * z.last_level)
            logger.debug("Extending first layer for the primed tail", extra={"n_out": deeper})
            z = solve_z(params, deeper, tol)
    raise TailNotConvergedError(z.last_level, get_settings().solver.l_max(n_out), float("inf"))


def recurrence_residuals(
    params: DemographicParams, tables: PerturbationTables
) -> RecurrenceResiduals:
    """Absolute residuals of both layers and their bottom closures on 2..n_max-1."""
    x, y, xp, yp = tables.x, tables.y, tables.xp, tables.yp
    top = tables.n_max

    def z(size: int) -> np.ndarray:
        return np.array([x[size], y[size]])

    def zp(size: int) -> np.ndarray:
        return np.array([xp[size], yp[size]])

    c_tilde, f_tilde = first_layer_start(params)
    start = first_layer(3, params)
    first_start = vector_norm(start.B @ z(4) - c_tilde @ z(3) - f_tilde)

    first_worst, first_level = 0.0, 0
    for size in range(4, top):
        blk = first_layer(size, params)
        res = vector_norm(blk.B @ z(size + 1) - blk.C @ z(size) - blk.D @ z(size - 1) - blk.f)
        if res > first_worst:
            first_worst, first_level = res, size

    b_tilde, ct2, ft2 = second_layer_start(x[2], y[2], x[3], y[3])
    second_start = vector_norm(b_tilde @ zp(3) - ct2 @ zp(2) - ft2)

    second_worst, second_level = 0.0, 0
    for size in range(3, top):
        blk = second_layer(size, params, y[size - 1], y[size], y[size + 1])
        res = vector_norm(
            blk.B @ zp(size + 1) - blk.C @ zp(size) - blk.D @ zp(size - 1) - blk.f
        )
        if res > second_worst:
            second_worst, second_level = res, size

    return RecurrenceResiduals(
        first_start=first_start,
        first_layer=first_worst,
        first_worst_level=first_level,
        second_start=second_start,
        second_layer=second_worst,
        second_worst_level=second_level,
    )


def _diagnostics(
    params: DemographicParams,
    n_max: int,
    first: Optional[TailSweep] = None,
    second: Optional[TailSweep] = None,
    residuals: Optional[RecurrenceResiduals] = None,
) -> SolverDiagnostics:
    k_mats, norm_m, conds, gs = forward_first_layer(params, n_max)
    levels = np.arange(3, n_max + 1)
    norm_g = np.array(
        [
            row_norm(np.array([[0.0, 1.0 / n], [1.0, 0.0]]) + k / params.b)
            for n, k in zip(levels, k_mats)
        ]
    )
    nan = float("nan")
    return SolverDiagnostics(
        levels=levels,
        norm_k=np.array([row_norm(k) for k in k_mats]),
        norm_g=norm_g,
        m_inv_ratio=norm_m * params.c * levels / (2.0 * params.b),
        cond_f=conds,
        g_vectors=gs,
        tail_residual=first.tail_estimate if first else nan,
        l_used=first.last_level if first else 0,
        l_max=first.l_max if first else 0,
        recurrence_residual=(
            max(residuals.first_start, residuals.first_layer) if residuals else nan
        ),
        prime_tail_residual=second.tail_estimate if second else nan,
        prime_l_used=second.last_level if second else 0,
        prime_recurrence_residual=(
            max(residuals.second_start, residuals.second_layer) if residuals else nan
        ),
    )


def tables_from_solutions(
    params: DemographicParams, n_max: int, zp: ZPrimeSolution
) -> PerturbationTables:
    """Assemble tables indexed by N from a solved second layer and its first layer."""
    first = zp.first
    x = np.zeros(n_max + 1)
    y = np.zeros(n_max + 1)
    xp = np.zeros(n_max + 1)
    yp = np.zeros(n_max + 1)
    x[2], y[2] = first.s2 - 1.5 * zp.y2, zp.y2
    xp[2], yp[2] = zp.z2
    for size in range(3, n_max + 1):
        x[size], y[size] = first.sweep.at(size)
        xp[size], yp[size] = zp.sweep.at(size)
    return PerturbationTables(
        params=params.neutral(),
        n_max=n_max,
        x=x,
        y=y,
        xp=xp,
        yp=yp,
        s2=first.s2,
        y2_split=zp.y2,
        source=TablesSource.RECURRENCE,
    )


@timed_operation("solve_recurrence_tables")
def solve_recurrence_tables(
    params: DemographicParams, n_max: int, tol: Optional[float] = None, y2: float = 0.0
) -> PerturbationTables:
    """Both layers from the tail method; raises if the tail or the residuals fail."""
    tol = get_settings().solver.tol if tol is None else tol
    z = solve_z(params, n_max, tol)
    zp = solve_z_prime(params, z, tol, y2=y2)
    tables = tables_from_solutions(params, n_max, zp)

    residuals = recurrence_residuals(params, tables)
    if residuals.worst > tol:
        worst_first = max(residuals.first_start, residuals.first_layer)
        if worst_first > tol:
            raise RecurrenceResidualError(
                "first", worst_first, tol, residuals.first_worst_level
            )
        raise RecurrenceResidualError(
            "second",
            max(residuals.second_start, residuals.second_layer),
            tol,
            residuals.second_worst_level,
        )

    diagnostics = _diagnostics(params, n_max, zp.first.sweep, zp.sweep, residuals)
    logger.info(
        "Solved perturbation tables",
        extra={
            "n_max": n_max,
            "l_used": diagnostics.l_used,
            "prime_l_used": diagnostics.prime_l_used,
            "residual": residuals.worst,
        },
    )
    return tables.model_copy(update={"diagnostics": diagnostics})


def _invert_closed_forms(
    params: DemographicParams, n_max: int, derivatives: DerivativeTable
) -> PerturbationTables:
    lattice = derivatives.lattice
    v, vp = derivatives.v, derivatives.vprime

    def at(values: np.ndarray, k: int, m: int, n: int) -> float:
        return float(values[lattice.index(k, m, n)])

    x = np.zeros(n_max + 1)
    y = np.zeros(n_max + 1)
    xp = np.zeros(n_max + 1)
    yp = np.zeros(n_max + 1)

    s2 = 2.0 * at(v, 1, 1, 0)
    x[2], y[2] = s2, 0.0
    yp[2] = (at(vp, 1, 0, 1) - s2) / 2.0
    xp[2] = at(vp, 1, 1, 0) - 1.5 * yp[2]

    for size in range(3, n_max + 1):
        n = float(size)
        v01 = at(v, size - 1, 0, 1)
        v10 = at(v, size - 1, 1, 0)
        y[size] = n * n * v01 / (4.0 * (n - 2.0) * (n - 1.0))
        x[size] = n * v10 / (n - 1.0) - (2.0 * n - 1.0) * y[size] / n

        yy = 2.0 * n - 2.0
        yp[size] = (
            (at(vp, size - 1, 0, 1) - yy * x[size] / n + yy * yy * y[size] / (n * n))
            * n
            / (2.0 * yy)
        )
        xp[size] = (
            at(vp, size - 1, 1, 0)
            - (2.0 * n - 1.0) * yp[size] / n
            + (2.0 * n - 1.0) ** 2 * y[size] / (2.0 * n * n)
        )

    return PerturbationTables(
        params=params.neutral(),
        n_max=n_max,
        x=x,
        y=y,
        xp=xp,
        yp=yp,
        s2=s2,
        y2_split=0.0,
        source=TablesSource.ORACLE,
    )


@timed_operation("tables_from_oracle")
def tables_from_oracle(params: DemographicParams, n_max: int) -> PerturbationTables:
    """
    Read x_N, y_N, x'_N, y'_N off the exact v and v' at the sample states
    (N-1, 1, 0) and (N-1, 0, 1), solved on a lattice with a margin above n_max.
    """
    lattice_top = get_settings().solver.lattice_for_support(n_max)
    derivatives = solve_derivatives(params, lattice_top)
    tables = _invert_closed_forms(params, n_max, derivatives)
    try:
        diagnostics = _diagnostics(params, n_max)
    except SingularSystemError:
        diagnostics = None
    return tables.model_copy(update={"diagnostics": diagnostics})


def solve_tables(
    params: DemographicParams,
    n_max: int,
    tol: Optional[float] = None,
    allow_fallback: bool = True,
) -> PerturbationTables:
    """
    Perturbation tables for sizes 2..n_max: the recurrences when their tail
    contracts and the residuals pass, the Dirichlet extraction otherwise.
    """
    key = ("tables", params.neutral(), n_max, tol, allow_fallback)

    def compute() -> PerturbationTables:
        try:
            return solve_recurrence_tables(params, n_max, tol)
        except (TailNotConvergedError, SingularSystemError, RecurrenceResidualError) as e:
            if not allow_fallback:
                raise
            logger.warning(
                "Recurrence unusable, extracting tables from the Dirichlet solution",
                extra={"n_max": n_max, "reason": e.code, "b": params.b, "c": params.c},
            )
            return tables_from_oracle(params, n_max)

    return table_cache().get_or_compute(key, compute)


def v_value(state: PopulationState, tables: PerturbationTables) -> float:
    """v(k, m, n) = (k - n) [ (m/N) x_N + ((N^2 - (k-n)^2)/N^2) y_N ]."""
    size = state.N
    tables.require(size)
    j = state.k - state.n
    if size == 2:
        if state.as_tuple() == (1, 1, 0):
            return tables.s2 / 2.0
        if state.as_tuple() == (0, 1, 1):
            return -tables.s2 / 2.0
        return 0.0
    n = float(size)
    return j * (state.m / n * tables.x[size] + (n * n - j * j) / (n * n) * tables.y[size])


def v_prime_value(state: PopulationState, tables: PerturbationTables) -> float:
    """v'(k, m, n) = (nY/N) x_N + m x'_N + Y(2N - Y)(y'_N / N - Y y_N / (2N^2))."""
    size = state.N
    tables.require(size)
    n = float(size)
    big_y = float(state.Y)
    return (
        state.n * big_y / n * tables.x[size]
        + state.m * tables.xp[size]
        + big_y * (2.0 * n - big_y) * (tables.yp[size] / n - big_y * tables.y[size] / (2.0 * n * n))
    )


def w_function(
    state: PopulationState, params: DemographicParams, tables: PerturbationTables
) -> float:
    """delta * v + delta' * v'."""
    if params.is_neutral:
        return 0.0
    return params.delta * v_value(state, tables) + params.delta_prime * v_prime_value(
        state, tables
    )


def fixation_first_order(
    state: PopulationState,
    params: DemographicParams,
    tables: PerturbationTables,
    clamp: bool = False,
) -> float:
    """p(s) - delta v(s) - delta' v'(s); ``clamp`` restricts the result to [0, 1]."""
    raw = neutral_fixation(state) - w_function(state, params, tables)
    if clamp:
        return min(1.0, max(0.0, raw))
    return raw


def mutant_entry_first_order(
    k: int, params: DemographicParams, tables: PerturbationTables
) -> float:
    """
    First-order fixation probability from (k, 1, 0), a single heterozygote:
    1/(2(k+1)) - delta (k/(k+1) x_{k+1} + k(2k+1)/(k+1)^2 y_{k+1}) - delta' v'(k, 1, 0).
    """
    size = k + 1
    tables.require(size)
    if k < 1:
        raise TableRangeError(size, 2, tables.n_max, "mutant entry")
    state = PopulationState(k=k, m=1, n=0)
    if size == 2:
        v = tables.s2 / 2.0
    else:
        v = k / (k + 1.0) * tables.x[size] + k * (2.0 * k + 1.0) / (k + 1.0) ** 2 * tables.y[size]
    return 1.0 / (2.0 * (k + 1.0)) - params.delta * v - params.delta_prime * v_prime_value(
        state, tables
    )


def reconstruct_v(state: PopulationState, v_10: float, v_01: float) -> float:
    """
    v at a state of size N >= 3 from its values at (N-1, 1, 0) and (N-1, 0, 1)
    alone, through the closed form.
    """
    size = state.N
    if size < 3:
        raise TableRangeError(size, 3, size, "reconstruction")
    n = float(size)
    y = n * n * v_01 / (4.0 * (n - 2.0) * (n - 1.0))
    x = n * v_10 / (n - 1.0) - (2.0 * n - 1.0) * y / n
    j = state.k - state.n
    return j * (state.m / n * x + (n * n - j * j) / (n * n) * y)


def diagnostics(params: DemographicParams, tables: PerturbationTables) -> SolverDiagnostics:
    """Stored diagnostics of the tables, or the forward-sweep norms when none were kept."""
    if tables.diagnostics is not None:
        return tables.diagnostics
    return _diagnostics(params.neutral(), tables.n_max)


def split_invariance(
    params: DemographicParams, n_max: int, y2_alt: float = 1.0, tol: Optional[float] = None
) -> tuple[float, float]:
    """
    Largest changes of h_3 and of v' on the states of size 2 and 3 when the
    undetermined split of (x_2, y_2) moves from y_2 = 0 to ``y2_alt``.
    """
    z = solve_z(params, n_max, tol)
    _, h_ref = prime_start(params, z, 0.0)
    _, h_alt = prime_start(params, z, y2_alt)
    h_gap = vector_norm(h_ref - h_alt) / (1.0 + vector_norm(h_ref))

    ref = solve_recurrence_tables(params, n_max, tol, y2=0.0)
    alt = solve_recurrence_tables(params, n_max, tol, y2=y2_alt)
    samples = [
        PopulationState(k=k, m=m, n=size - k - m)
        for size in (2, 3)
        for k in range(size + 1)
        for m in range(size - k + 1)
    ]
    v_gap = max(abs(v_prime_value(s, ref) - v_prime_value(s, alt)) for s in samples)
    return h_gap, v_gap


def fit_tail_asymptotics(
    tables: PerturbationTables, lo: Optional[int] = None, hi: Optional[int] = None
) -> AsymptoticFit:
    """Least-squares y_N ~ c1/N + c2/N^2 on [lo, hi], default the upper half of the table."""
    hi = tables.n_max if hi is None else hi
    lo = max(3, tables.n_max // 2) if lo is None else lo
    sizes = np.arange(lo, hi + 1, dtype=np.float64)
    design = np.column_stack([1.0 / sizes, 1.0 / sizes**2])
    target = tables.y[lo : hi + 1]
    coeffs, *_ = np.linalg.lstsq(design, target, rcond=None)
    fitted = design @ coeffs
    scale = float(np.linalg.norm(target))
    residual = float(np.linalg.norm(fitted - target)) / scale if scale > 0 else 0.0
    return AsymptoticFit(
        c1=float(coeffs[0]), c2=float(coeffs[1]), relative_residual=residual, lo=lo, hi=hi
    )


def write_tables_csv(
    tables: PerturbationTables, stream: TextIO, comments: Optional[list[str]] = None
) -> int:
    return write_rows(stream, ("N", "x", "y", "xp", "yp"), tables.rows(), comments)


def write_diagnostics_csv(
    report: SolverDiagnostics, stream: TextIO, comments: Optional[list[str]] = None
) -> int:
    return write_rows(stream, ("N", "normK", "normG", "condF"), report.rows(), comments)
