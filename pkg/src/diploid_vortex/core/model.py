"""
Transition rates and generator of the three-type diploid birth-death process.

Births follow Mendelian segregation from a uniformly chosen pair of distinct
parents; deaths combine a genotype-specific natural rate with pairwise
competition. No death occurs once the population is down to two individuals.
The same rate formula serves scalar callers (simulators) and numpy arrays
(lattice assembly).
"""

from typing import Any, Callable

import numpy as np

from diploid_vortex.types.enums import EVENT_ORDER, EVENT_SHIFTS, Region
from diploid_vortex.types.models import (
    DemographicParams,
    GeneralRates,
    PopulationState,
    Transition,
    TransitionSet,
)

Rates = GeneralRates | DemographicParams


def as_general(rates: Rates) -> GeneralRates:
    if isinstance(rates, DemographicParams):
        return GeneralRates.from_params(rates)
    return rates


def raw_event_rates(k: Any, m: Any, n: Any, rates: GeneralRates) -> tuple[Any, ...]:
    """
    The six rates (three births, three deaths) before the N = 2 rule.

    Works on Python numbers and on numpy arrays alike.
    """
    (b11, b12, b13), (_, b22, b23), (_, _, b33) = rates.b
    c = rates.c
    d1, d2, d3 = rates.d
    size_less_one = k + m + n - 1
    m_pairs = m * (m - 1)

    b1 = (b11 * k * (k - 1) + b12 * k * m + b22 * m_pairs / 4.0) / size_less_one
    b2 = (b12 * k * m + b22 * m_pairs / 2.0 + b23 * m * n + b13 * 2.0 * k * n) / size_less_one
    b3 = (b33 * n * (n - 1) + b23 * m * n + b22 * m_pairs / 4.0) / size_less_one

    # c[j][i]: competition exerted by a type-j individual on a type-i individual
    death1 = (d1 + c[0][0] * (k - 1) + c[1][0] * m + c[2][0] * n) * k
    death2 = (d2 + c[0][1] * k + c[1][1] * (m - 1) + c[2][1] * n) * m
    death3 = (d3 + c[0][2] * k + c[1][2] * m + c[2][2] * (n - 1)) * n
    return b1, b2, b3, death1, death2, death3


def event_rates(k: int, m: int, n: int, rates: GeneralRates) -> tuple[float, ...]:
    """Scalar rates in the fixed event order, deaths switched off at N = 2."""
    b1, b2, b3, x1, x2, x3 = raw_event_rates(k, m, n, rates)
    if k + m + n <= 2:
        return (b1, b2, b3, 0.0, 0.0, 0.0)
    return (b1, b2, b3, x1, x2, x3)


def event_rate_arrays(
    k: np.ndarray, m: np.ndarray, n: np.ndarray, rates: GeneralRates
) -> np.ndarray:
    """Vectorised rates, shape (6, len(k))."""
    k = k.astype(np.float64)
    m = m.astype(np.float64)
    n = n.astype(np.float64)
    out = np.vstack(raw_event_rates(k, m, n, rates))
    out[3:, (k + m + n) <= 2] = 0.0
    return out


def birth_rates(state: PopulationState, rates: Rates) -> tuple[float, float, float]:
    """Rates at which an AA, Aa or aa individual is born."""
    b1, b2, b3, _, _, _ = event_rates(state.k, state.m, state.n, as_general(rates))
    return (float(b1), float(b2), float(b3))


def death_rates(state: PopulationState, rates: Rates) -> tuple[float, float, float]:
    """Rates at which the population loses an AA, Aa or aa individual."""
    _, _, _, x1, x2, x3 = event_rates(state.k, state.m, state.n, as_general(rates))
    return (float(x1), float(x2), float(x3))


def _shifted(state: PopulationState, shift: tuple[int, int, int]) -> PopulationState | None:
    k, m, n = state.k + shift[0], state.m + shift[1], state.n + shift[2]
    if min(k, m, n) < 0 or k + m + n < 2:
        return None
    return PopulationState(k=k, m=m, n=n)


def transitions(state: PopulationState, rates: Rates) -> TransitionSet:
    """All six jumps out of ``state``; unreachable targets carry rate 0 and no state."""
    values = event_rates(state.k, state.m, state.n, as_general(rates))
    entries = []
    for event, shift, rate in zip(EVENT_ORDER, EVENT_SHIFTS, values):
        target = _shifted(state, shift)
        entries.append(
            Transition(event=event, target=target, rate=float(rate) if target else 0.0)
        )
    return TransitionSet(source=state, entries=tuple(entries))


def apply_generator(
    f: Callable[[PopulationState], float], state: PopulationState, rates: Rates
) -> float:
    """(Lf)(state) = sum over jumps of rate * (f(target) - f(state))."""
    here = f(state)
    total = 0.0
    for entry in transitions(state, rates).entries:
        if entry.rate > 0.0 and entry.target is not None:
            total += entry.rate * (f(entry.target) - here)
    return total


def classify(state: PopulationState) -> Region:
    if state.m == 0 and state.n == 0:
        return Region.LOST
    if state.k == 0 and state.m == 0:
        return Region.FIXED
    return Region.INTERIOR


def neutral_fixation(state: PopulationState) -> float:
    """Fixation probability of allele a without selection: its frequency (m + 2n)/(2N)."""
    return (state.m + 2 * state.n) / (2.0 * state.N)
