"""
Limiting substitution process: successive fixations of deleterious mutations.

After j fixations every individual carries j homozygous loads, so the
intrinsic death rate is d_j = d0 + j * delta_prime and the next fixation waits
an Exp(tau(d_j)) time.
"""

import math
from typing import Optional, TextIO

import numpy as np

from diploid_vortex.config.settings import get_settings
from diploid_vortex.exceptions import InvalidParametersError, NonPositiveRateError
from diploid_vortex.logging import get_logger, timed_operation
from diploid_vortex.simulate.rng import RngStream
from diploid_vortex.substitution.rates import require_no_overdominance, substitution_rate
from diploid_vortex.types.enums import Coupling, TauMethod
from diploid_vortex.types.models import DemographicParams
from diploid_vortex.types.results import (
    MeltdownStep,
    MeltdownSummary,
    MeltdownTrajectory,
    SubstitutionRate,
)
from diploid_vortex.utils.csvio import write_rows
from diploid_vortex.utils.pool import ordered_map

logger = get_logger(__name__)

_REPLICATES_PER_TASK = 500


def meltdown_rates(
    d0: float,
    b: float,
    c: float,
    delta: float,
    delta_prime: float,
    mu: float,
    n_fixations: int,
    method: TauMethod = TauMethod.EXACT,
) -> list[SubstitutionRate]:
    """tau(d0 + j delta', delta, delta') for j = 0..n_fixations-1."""
    if n_fixations < 1:
        raise InvalidParametersError(
            "n_fixations must be at least 1", {"n_fixations": n_fixations}
        )
    require_no_overdominance(delta, delta_prime)
    if not delta_prime > 0:
        raise InvalidParametersError(
            "meltdown needs delta_prime > 0", {"delta_prime": delta_prime}
        )
    rates = []
    for j in range(n_fixations):
        params = DemographicParams(
            b=b, d=d0 + j * delta_prime, c=c, delta=delta, delta_prime=delta_prime
        )
        rate = substitution_rate(params, mu, method)
        if not rate.tau > 0:
            raise NonPositiveRateError(j, rate.tau)
        rates.append(rate)
    return rates


def _draw_waits(taus: np.ndarray, rng: RngStream, coupling: Coupling) -> list[float]:
    if coupling == Coupling.COMMON:
        shared = rng.exponential(1.0)
        return [shared / float(tau) for tau in taus]
    return [rng.exponential(float(tau)) for tau in taus]


def trajectory_from_rates(
    rates: list[SubstitutionRate],
    seed: int,
    stream_id: int = 0,
    coupling: Coupling = Coupling.INDEPENDENT,
) -> MeltdownTrajectory:
    taus = np.array([r.tau for r in rates])
    waits = _draw_waits(taus, RngStream(seed, stream_id), coupling)
    steps = tuple(
        MeltdownStep(index=j, d=rate.params.d, tau=rate.tau, waiting_time=w)
        for j, (rate, w) in enumerate(zip(rates, waits))
    )
    return MeltdownTrajectory(
        steps=steps,
        seed=seed,
        stream_id=stream_id,
        coupling=coupling,
        method=rates[0].method,
    )


def simulate_meltdown(
    d0: float,
    b: float,
    c: float,
    delta: float,
    delta_prime: float,
    mu: float,
    n_fixations: int,
    seed: int,
    method: TauMethod = TauMethod.EXACT,
    coupling: Coupling = Coupling.INDEPENDENT,
    stream_id: int = 0,
) -> MeltdownTrajectory:
    """
    One trajectory of ``n_fixations`` waiting times. With ``independent``
    coupling each wait has its own Exp(1) draw; with ``common`` one Exp(1) draw
    is scaled by 1/tau_j for every j. Marginals are Exp(tau_j) either way.
    """
    rates = meltdown_rates(d0, b, c, delta, delta_prime, mu, n_fixations, method)
    return trajectory_from_rates(rates, seed, stream_id, coupling)


def _block(task: tuple[np.ndarray, int, int, int, Coupling]) -> np.ndarray:
    taus, seed, start, stop, coupling = task
    return np.array(
        [_draw_waits(taus, RngStream(seed, r), coupling) for r in range(start, stop)]
    ).reshape(stop - start, len(taus))


@timed_operation("pooled_meltdown")
def pooled_meltdown(
    d0: float,
    b: float,
    c: float,
    delta: float,
    delta_prime: float,
    mu: float,
    n_fixations: int,
    replicates: int,
    seed: int,
    method: TauMethod = TauMethod.EXACT,
    coupling: Coupling = Coupling.COMMON,
    workers: Optional[int] = None,
) -> MeltdownSummary:
    """
    Mean waiting time per fixation index over ``replicates`` trajectories
    (replicate r on stream (seed, r)), with standard errors and 1/tau_j.
    """
    if replicates < 2:
        raise InvalidParametersError("need at least 2 replicates", {"replicates": replicates})
    workers = get_settings().simulation.workers if workers is None else workers
    rates = meltdown_rates(d0, b, c, delta, delta_prime, mu, n_fixations, method)
    taus = np.array([r.tau for r in rates])

    tasks = [
        (taus, seed, start, min(start + _REPLICATES_PER_TASK, replicates), coupling)
        for start in range(0, replicates, _REPLICATES_PER_TASK)
    ]
    waits = np.vstack(ordered_map(_block, tasks, workers))
    mean = waits.mean(axis=0)
    std_error = waits.std(axis=0, ddof=1) / math.sqrt(replicates)
    summary = MeltdownSummary(
        d=tuple(r.params.d for r in rates),
        mean=tuple(float(x) for x in mean),
        std_error=tuple(float(x) for x in std_error),
        expected=tuple(float(1.0 / t) for t in taus),
        replicates=replicates,
        coupling=coupling,
    )
    logger.info(
        "Pooled meltdown",
        extra={
            "replicates": replicates,
            "fixations": n_fixations,
            "strictly_decreasing": summary.strictly_decreasing,
        },
    )
    return summary


def write_meltdown_csv(
    run: MeltdownTrajectory, stream: TextIO, comments: Optional[list[str]] = None
) -> int:
    rows = ((s.index, s.d, s.waiting_time) for s in run.steps)
    return write_rows(stream, ("fixation_index", "d", "waiting_time"), rows, comments)
