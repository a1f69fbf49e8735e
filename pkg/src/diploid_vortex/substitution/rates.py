"""
Substitution rate of a deleterious allele and the vortex curve.

A mutant heterozygote appears in a monomorphic population of size N at rate
2 mu N l(N) and fixes with probability u((N-1, 1, 0)), so

    tau = 2 mu * sum_N N u((N-1, 1, 0)) l(N),     T = 1 / tau.

``tau_exact`` takes u from the lattice solver, ``tau_linear`` from the
first-order expansion u = 1/(2N) - w.
"""

from typing import Optional, Sequence, TextIO

import numpy as np

from diploid_vortex.config.settings import get_settings
from diploid_vortex.demography.stationary import crossing_index, stationary_law
from diploid_vortex.exceptions import (
    InvalidGridError,
    InvalidParametersError,
    OverdominanceError,
    TableRangeError,
)
from diploid_vortex.logging import get_logger, timed_operation
from diploid_vortex.solvers.exact import solve_fixation
from diploid_vortex.solvers.perturbation import solve_tables, w_function
from diploid_vortex.types.enums import TauMethod
from diploid_vortex.types.models import DemographicParams, PopulationState
from diploid_vortex.types.results import (
    MonotonicityCheck,
    PerturbationTables,
    PivotDecomposition,
    StationaryLaw,
    SubstitutionRate,
    VortexCurve,
    VortexRow,
)
from diploid_vortex.utils.csvio import provenance_line, write_rows
from diploid_vortex.utils.pool import ordered_map

logger = get_logger(__name__)


def require_no_overdominance(delta: float, delta_prime: float) -> None:
    """Only delta < delta' (or the neutral pair) is in scope."""
    if delta == 0.0 and delta_prime == 0.0:
        return
    if delta >= delta_prime:
        raise OverdominanceError(delta, delta_prime)


def _check_mu(mu: float) -> None:
    if not mu > 0:
        raise InvalidParametersError("mutation intensity must be positive", {"mu": mu})


def _mutant_sizes(law: StationaryLaw) -> np.ndarray:
    return np.arange(2, law.n_max + 1)


@timed_operation("tau_exact")
def tau_exact(
    params: DemographicParams,
    mu: float,
    tol: Optional[float] = None,
    n_max: Optional[int] = None,
) -> SubstitutionRate:
    """
    Substitution rate with the exact fixation probability.

    Args:
        params: Demography and the two death-rate increments
        mu: Per-strand mutation intensity
        tol: Stationary tail mass neglected in the series
        n_max: Lattice truncation; defaults to the stationary support plus a margin
    """
    _check_mu(mu)
    require_no_overdominance(params.delta, params.delta_prime)
    law = stationary_law(params.b, params.d, params.c, tol)
    top = get_settings().solver.lattice_for_support(law.n_max) if n_max is None else n_max
    if top < law.n_max:
        raise TableRangeError(law.n_max, 2, top, "fixation lattice")

    table = solve_fixation(params, top)
    sizes = _mutant_sizes(law)
    idx = table.lattice.index_array(sizes - 1, np.ones_like(sizes), np.zeros_like(sizes))
    tau = 2.0 * mu * float(np.sum(sizes * table.u[idx] * law.probs))
    logger.info(
        "Substitution rate",
        extra={"method": "exact", "d": params.d, "tau": tau, "n_terms": len(sizes)},
    )
    return SubstitutionRate(
        tau=tau,
        T=1.0 / tau,
        method=TauMethod.EXACT,
        params=params,
        mu=mu,
        tol=law.tail_mass,
        n_terms=len(sizes),
    )


def _first_order_bracket(
    params: DemographicParams, law: StationaryLaw, tables: PerturbationTables
) -> float:
    """sum_N N w((N-1, 1, 0)) l(N)."""
    if params.is_neutral:
        return 0.0
    tables.require(law.n_max)
    return float(
        sum(
            size * w_function(PopulationState(k=size - 1, m=1, n=0), params, tables) * p
            for size, p in law.rows()
        )
    )


@timed_operation("tau_linear")
def tau_linear(
    params: DemographicParams,
    mu: float,
    tables: Optional[PerturbationTables] = None,
    tol: Optional[float] = None,
) -> SubstitutionRate:
    """Substitution rate 2 mu (1/2 - sum_N N w((N-1, 1, 0)) l(N)) from the first-order tables."""
    _check_mu(mu)
    require_no_overdominance(params.delta, params.delta_prime)
    law = stationary_law(params.b, params.d, params.c, tol)
    if tables is None and not params.is_neutral:
        tables = solve_tables(params, law.n_max)
    bracket = 0.0 if tables is None else _first_order_bracket(params, law, tables)
    tau = 2.0 * mu * (0.5 - bracket)
    logger.info(
        "Substitution rate",
        extra={"method": "linear", "d": params.d, "tau": tau, "n_terms": law.n_max - 1},
    )
    return SubstitutionRate(
        tau=tau,
        T=1.0 / tau if tau != 0.0 else float("inf"),
        method=TauMethod.LINEAR,
        params=params,
        mu=mu,
        tol=law.tail_mass,
        n_terms=law.n_max - 1,
    )


def substitution_rate(
    params: DemographicParams, mu: float, method: TauMethod = TauMethod.EXACT
) -> SubstitutionRate:
    if method == TauMethod.LINEAR:
        return tau_linear(params, mu)
    return tau_exact(params, mu)


def w_value(
    state: PopulationState, params: DemographicParams, tables: PerturbationTables
) -> float:
    """delta v + delta' v' at one state."""
    return w_function(state, params, tables)


def w_monotonicity_in_d(
    states: Sequence[PopulationState],
    params: DemographicParams,
    d: float,
    d_prime: float,
    tables_d: Optional[PerturbationTables] = None,
    tables_d_prime: Optional[PerturbationTables] = None,
) -> MonotonicityCheck:
    """Compare w at each sample state under the death rates d < d'."""
    if not d_prime > d:
        raise InvalidParametersError("need d' > d", {"d": d, "d_prime": d_prime})
    top = max(s.N for s in states)
    at_d = params.with_death(d)
    at_dp = params.with_death(d_prime)
    tables_d = tables_d if tables_d is not None else solve_tables(at_d, max(top, 8))
    tables_d_prime = (
        tables_d_prime if tables_d_prime is not None else solve_tables(at_dp, max(top, 8))
    )
    return MonotonicityCheck(
        d=d,
        d_prime=d_prime,
        states=tuple(states),
        w_d=tuple(w_function(s, at_d, tables_d) for s in states),
        w_d_prime=tuple(w_function(s, at_dp, tables_d_prime) for s in states),
    )


def n_weighted_w(
    params: DemographicParams, tables: PerturbationTables, top: Optional[int] = None
) -> np.ndarray:
    """N w((N-1, 1, 0)) for N = 2..top; nondecreasing in N for small b when delta' > delta > 0."""
    top = tables.n_max if top is None else top
    return np.array(
        [
            size * w_function(PopulationState(k=size - 1, m=1, n=0), params, tables)
            for size in range(2, top + 1)
        ]
    )


def pivot_decomposition(
    params: DemographicParams,
    d: float,
    d_prime: float,
    tables_d: Optional[PerturbationTables] = None,
    tables_d_prime: Optional[PerturbationTables] = None,
    tol: Optional[float] = None,
) -> PivotDecomposition:
    """
    First-order change of the bracket sum_N N w((N-1,1,0)) l(N) from d' to d,
    directly and split at the crossing size n0 of the two stationary laws. The
    split inserts W(n0, d') sum_N (l(N, d') - l(N, d)), which vanishes because
    both laws are normalised.
    """
    if not d_prime > d:
        raise InvalidParametersError("need d' > d", {"d": d, "d_prime": d_prime})
    at_d = params.with_death(d)
    at_dp = params.with_death(d_prime)
    law_d = stationary_law(params.b, d, params.c, tol)
    law_dp = stationary_law(params.b, d_prime, params.c, tol)
    top = max(law_d.n_max, law_dp.n_max)
    tables_d = tables_d if tables_d is not None else solve_tables(at_d, top)
    tables_d_prime = (
        tables_d_prime if tables_d_prime is not None else solve_tables(at_dp, top)
    )

    sizes = np.arange(2, top + 1)
    l_d = np.array([law_d.prob(int(s)) for s in sizes])
    l_dp = np.array([law_dp.prob(int(s)) for s in sizes])
    big_w_d = n_weighted_w(at_d, tables_d, top)
    big_w_dp = n_weighted_w(at_dp, tables_d_prime, top)

    raw = float(np.dot(big_w_d, l_d) - np.dot(big_w_dp, l_dp))
    n0 = crossing_index(law_d, law_dp).n0
    pivot = big_w_dp[n0 - 2]
    level_term = float(np.dot(l_d, big_w_d - big_w_dp))
    crossing_term = float(np.dot(big_w_dp - pivot, l_dp - l_d))
    pivoted = level_term - crossing_term
    scale = max(abs(raw), abs(pivoted), np.finfo(float).tiny)
    return PivotDecomposition(
        d=d,
        d_prime=d_prime,
        n0=n0,
        raw=raw,
        level_term=level_term,
        crossing_term=crossing_term,
        relative_gap=abs(raw - pivoted) / scale,
    )


def _curve_point(task: tuple[DemographicParams, float, TauMethod]) -> VortexRow:
    params, mu, method = task
    rate = substitution_rate(params, mu, method)
    return VortexRow(d=params.d, tau=rate.tau, T=rate.T)


@timed_operation("vortex_curve")
def vortex_curve(
    d_grid: Sequence[float],
    b: float,
    c: float,
    delta: float,
    delta_prime: float,
    mu: float,
    method: TauMethod = TauMethod.EXACT,
    workers: int = 1,
) -> VortexCurve:
    """
    Mean fixation time T = 1/tau along an increasing grid of intrinsic death
    rates. Grid points may be spread over ``workers`` processes; rows keep the
    grid order.
    """
    grid = [float(x) for x in d_grid]
    if not grid or any(x < 0 for x in grid):
        raise InvalidGridError(",".join(map(str, grid)), "death rates must be nonnegative")
    if any(b2 <= a2 for a2, b2 in zip(grid, grid[1:])):
        raise InvalidGridError(",".join(map(str, grid)), "grid must be strictly increasing")
    _check_mu(mu)
    require_no_overdominance(delta, delta_prime)

    tasks = [
        (DemographicParams(b=b, d=d, c=c, delta=delta, delta_prime=delta_prime), mu, method)
        for d in grid
    ]
    rows = ordered_map(_curve_point, tasks, workers)
    curve = VortexCurve(
        rows=tuple(rows),
        b=b,
        c=c,
        delta=delta,
        delta_prime=delta_prime,
        mu=mu,
        method=method,
    )
    logger.info(
        "Vortex curve",
        extra={"points": len(rows), "strictly_decreasing": curve.strictly_decreasing},
    )
    return curve


def write_curve_csv(curve: VortexCurve, stream: TextIO) -> int:
    comment = provenance_line(
        b=curve.b,
        c=curve.c,
        delta=curve.delta,
        delta_prime=curve.delta_prime,
        mu=curve.mu,
        method=curve.method,
    )
    rows = ((row.d, row.tau, row.T) for row in curve.rows)
    return write_rows(stream, ("d", "tau", "T"), rows, [comment])
