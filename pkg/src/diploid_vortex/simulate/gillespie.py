"""
Exact-event simulation of the three-type process and Monte Carlo fixation
estimates.
"""

import math
from typing import Optional, TextIO

import numpy as np
from scipy.stats import norm

from diploid_vortex.config.settings import get_settings
from diploid_vortex.core.model import Rates, as_general, event_rates
from diploid_vortex.exceptions import CensoringLimitExceeded, InvalidParametersError
from diploid_vortex.logging import get_logger, timed_operation
from diploid_vortex.simulate.rng import RngStream
from diploid_vortex.types.enums import EVENT_ORDER, EVENT_SHIFTS, Absorption, Region
from diploid_vortex.types.models import GeneralRates, PopulationState
from diploid_vortex.types.results import AbsorptionOutcome, FixationEstimate
from diploid_vortex.utils.csvio import write_rows
from diploid_vortex.utils.pool import ordered_map

logger = get_logger(__name__)

Z_99 = float(norm.ppf(0.995))
_REPLICATES_PER_TASK = 1_000

LogRow = tuple[float, str, int, int, int]


def _simulate(
    state: PopulationState,
    rates: GeneralRates,
    rng: RngStream,
    event_cap: int,
    log: Optional[list[LogRow]] = None,
) -> AbsorptionOutcome:
    k, m, n = state.k, state.m, state.n
    time = 0.0
    events = 0
    if log is not None:
        log.append((time, "start", k, m, n))

    while True:
        region = _region(k, m, n)
        if region != Region.INTERIOR:
            absorbed = Absorption.FIXED if region == Region.FIXED else Absorption.LOST
            break
        if events >= event_cap:
            absorbed = Absorption.CENSORED
            break

        values = event_rates(k, m, n, rates)
        total = float(sum(values))
        time += rng.exponential(total)
        e = rng.categorical(values, total)
        dk, dm, dn = EVENT_SHIFTS[e]
        k, m, n = k + dk, m + dm, n + dn
        events += 1
        if log is not None:
            log.append((time, EVENT_ORDER[e].value, k, m, n))

    return AbsorptionOutcome(
        absorbed_in=absorbed,
        final_state=PopulationState(k=k, m=m, n=n),
        events=events,
        time=time,
    )


def _region(k: int, m: int, n: int) -> Region:
    if m == 0 and n == 0:
        return Region.LOST
    if k == 0 and m == 0:
        return Region.FIXED
    return Region.INTERIOR


def run_to_absorption(
    state: PopulationState,
    params: Rates,
    rng: RngStream,
    event_cap: Optional[int] = None,
) -> AbsorptionOutcome:
    """
    Simulate until Gamma_a or Gamma_A is hit, or censor after ``event_cap``
    events. Waiting times are exponential in the total rate; the event is
    drawn in the fixed order birth-AA, birth-Aa, birth-aa, death-AA,
    death-Aa, death-aa.
    """
    cap = get_settings().simulation.event_cap if event_cap is None else event_cap
    return _simulate(state, as_general(params), rng, cap)


def trajectory(
    state: PopulationState,
    params: Rates,
    rng: RngStream,
    event_cap: Optional[int] = None,
) -> tuple[AbsorptionOutcome, list[LogRow]]:
    """As ``run_to_absorption``, also returning the event log (time, event, k, m, n)."""
    cap = get_settings().simulation.event_cap if event_cap is None else event_cap
    log: list[LogRow] = []
    outcome = _simulate(state, as_general(params), rng, cap, log)
    return outcome, log


def write_trajectory_csv(
    log: list[LogRow], stream: TextIO, comments: Optional[list[str]] = None
) -> int:
    return write_rows(stream, ("time", "event", "k", "m", "n"), log, comments)


def _replicate_block(
    task: tuple[PopulationState, GeneralRates, int, int, int, int]
) -> tuple[int, int, int]:
    state, rates, seed, start, stop, cap = task
    fixed = lost = censored = 0
    for replicate in range(start, stop):
        outcome = _simulate(state, rates, RngStream(seed, replicate), cap)
        if outcome.absorbed_in == Absorption.FIXED:
            fixed += 1
        elif outcome.absorbed_in == Absorption.LOST:
            lost += 1
        else:
            censored += 1
    return fixed, lost, censored


@timed_operation("mc_fixation")
def mc_fixation(
    state: PopulationState,
    params: Rates,
    reps: int,
    seed: int,
    event_cap: Optional[int] = None,
    workers: Optional[int] = None,
) -> FixationEstimate:
    """
    Fraction of completed replicates absorbed in Gamma_a with a normal 99%
    interval. Replicate r uses stream (seed, r), so the estimate does not
    depend on ``workers``.
    """
    if reps < 1:
        raise InvalidParametersError("reps must be at least 1", {"reps": reps})
    config = get_settings().simulation
    cap = config.event_cap if event_cap is None else event_cap
    workers = config.workers if workers is None else workers
    rates = as_general(params)

    tasks = [
        (state, rates, seed, start, min(start + _REPLICATES_PER_TASK, reps), cap)
        for start in range(0, reps, _REPLICATES_PER_TASK)
    ]
    blocks = ordered_map(_replicate_block, tasks, workers)
    fixed = sum(b[0] for b in blocks)
    lost = sum(b[1] for b in blocks)
    censored = sum(b[2] for b in blocks)

    if censored > config.max_censored_fraction * reps:
        raise CensoringLimitExceeded(censored, reps, config.max_censored_fraction)

    completed = fixed + lost
    p = fixed / completed if completed else 0.0
    halfwidth = Z_99 * math.sqrt(p * (1.0 - p) / completed) if completed else float("inf")
    logger.info(
        "Monte Carlo fixation",
        extra={"state": str(state), "reps": reps, "estimate": p, "censored": censored},
    )
    return FixationEstimate(
        estimate=p,
        ci_halfwidth_99=halfwidth,
        reps=reps,
        fixed=fixed,
        lost=lost,
        censored=censored,
    )


def draw_event_counts(
    state: PopulationState, params: Rates, draws: int, rng: RngStream
) -> np.ndarray:
    """
    Event types sampled ``draws`` times from the same state (the chain is
    returned to ``state`` after each jump); counts in the fixed event order.
    """
    values = event_rates(state.k, state.m, state.n, as_general(params))
    total = float(sum(values))
    counts = np.zeros(len(values), dtype=np.int64)
    if total <= 0.0:
        return counts
    for _ in range(draws):
        counts[rng.categorical(values, total)] += 1
    return counts
