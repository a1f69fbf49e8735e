"""
Stationary law of the monomorphic logistic birth-death process.

Births at rate bN, deaths at rate N(d + c(N - 1)), and no death at N = 2. The
law is l(N) proportional to (1/N) * prod_{k=2}^{N-1} b / (d + kc), computed in
log space and truncated where the geometric tail bound drops below ``tol``.
"""

from typing import Optional, TextIO

import numpy as np
from scipy.special import logsumexp

from diploid_vortex.config.settings import get_settings
from diploid_vortex.exceptions import InvalidParametersError
from diploid_vortex.logging import get_logger
from diploid_vortex.types.results import Crossing, StationaryLaw
from diploid_vortex.utils.cache import law_cache
from diploid_vortex.utils.csvio import write_rows

logger = get_logger(__name__)

SUPPORT_CAP = 1_000_000
_FIRST_CHUNK = 64
_NEGLIGIBLE = 1e-17


def _check(b: float, d: float, c: float, tol: float) -> None:
    if not b > 0:
        raise InvalidParametersError("birth rate b must be positive", {"b": b})
    if not c > 0:
        raise InvalidParametersError("competition rate c must be positive", {"c": c})
    if not d >= 0:
        raise InvalidParametersError("death rate d must be nonnegative", {"d": d})
    if not tol > 0:
        raise InvalidParametersError("tolerance must be positive", {"tol": tol})


def log_weights(b: float, d: float, c: float, top: int) -> np.ndarray:
    """Unnormalised log l(N) for N = 2..top."""
    k = np.arange(2, top, dtype=np.float64)
    steps = np.log(b) - np.log(d + c * k)
    sizes = np.arange(2, top + 1, dtype=np.float64)
    return -np.log(sizes) + np.concatenate([[0.0], np.cumsum(steps)])


def _first_below(log_w: np.ndarray, b: float, d: float, c: float, threshold: float) -> int:
    """
    Index of the first N whose tail bound w(N) rho / (1 - rho), rho = b / (d + cN),
    is below ``threshold`` times the partial sum up to N; -1 if none.
    """
    sizes = np.arange(2, len(log_w) + 2, dtype=np.float64)
    rho = b / (d + c * sizes)
    contracting = rho < 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        log_tail = log_w + np.log(rho) - np.log1p(-rho)
    partial = np.logaddexp.accumulate(log_w)
    ok = contracting & (log_tail < np.log(threshold) + partial)
    hits = np.flatnonzero(ok)
    return int(hits[0]) if hits.size else -1


def _support(b: float, d: float, c: float, tol: float) -> tuple[np.ndarray, int, int]:
    """Log weights deep enough for a negligible remainder, the support top and that depth."""
    top = _FIRST_CHUNK
    while True:
        log_w = log_weights(b, d, c, top)
        cut = _first_below(log_w, b, d, c, tol)
        deep = _first_below(log_w, b, d, c, _NEGLIGIBLE) if cut >= 0 else -1
        if deep >= 0:
            return log_w[: deep + 1], cut + 2, deep + 2
        if top >= SUPPORT_CAP:
            raise InvalidParametersError(
                "stationary support exceeds the size cap",
                {"b": b, "d": d, "c": c, "cap": SUPPORT_CAP},
            )
        top = min(2 * top, SUPPORT_CAP)


def _stationary_law(b: float, d: float, c: float, tol: float) -> StationaryLaw:
    log_w, n_max, depth = _support(b, d, c, tol)
    log_total = float(logsumexp(log_w))
    log_probs = log_w - log_total
    keep = n_max - 1
    probs = np.exp(log_probs[:keep])
    tail_mass = float(np.exp(logsumexp(log_probs[keep:]))) if depth > n_max else 0.0
    sizes = np.arange(2, n_max + 1, dtype=np.float64)
    mean = float(np.dot(sizes, probs) / probs.sum())
    logger.debug(
        "Stationary law",
        extra={"b": b, "d": d, "c": c, "n_max": n_max, "tail_mass": tail_mass, "mean": mean},
    )
    return StationaryLaw(
        b=b,
        d=d,
        c=c,
        n_max=n_max,
        probs=probs,
        log_probs=log_probs[:keep].copy(),
        tail_mass=tail_mass,
        mean=mean,
    )


def stationary_law(b: float, d: float, c: float, tol: Optional[float] = None) -> StationaryLaw:
    """
    Truncated stationary law of the population size.

    Args:
        b: Per-capita birth rate
        d: Intrinsic per-capita death rate
        c: Competition rate
        tol: Neglected tail mass; defaults to ``solver.stationary_tol``

    The returned probabilities sum to 1 - tail_mass; sizes above ``n_max``
    carry tail_mass <= tol in total.
    """
    tol = get_settings().solver.stationary_tol if tol is None else tol
    _check(b, d, c, tol)
    return law_cache().get_or_compute(
        ("law", float(b), float(d), float(c), float(tol)),
        lambda: _stationary_law(float(b), float(d), float(c), float(tol)),
    )


def crossing_index(law_d: StationaryLaw, law_dprime: StationaryLaw) -> Crossing:
    """
    Single-crossing comparison of two laws with the same (b, c) and d < d'.

    n0 is the last size where l(N, d') >= l(N, d); the ratio q(N) = l(N, d')/l(N, d)
    should decrease strictly, so the difference changes sign once.
    """
    if law_d.b != law_dprime.b or law_d.c != law_dprime.c:
        raise InvalidParametersError(
            "laws must share b and c",
            {"b": (law_d.b, law_dprime.b), "c": (law_d.c, law_dprime.c)},
        )
    if not law_dprime.d > law_d.d:
        raise InvalidParametersError(
            "crossing needs d' > d", {"d": law_d.d, "d_prime": law_dprime.d}
        )

    common = min(law_d.n_max, law_dprime.n_max) - 1
    log_q = law_dprime.log_probs[:common] - law_d.log_probs[:common]
    ratios = np.exp(log_q)
    above = log_q >= 0.0
    sign_changes = int(np.count_nonzero(above[1:] != above[:-1]))
    n0 = int(np.flatnonzero(above)[-1]) + 2 if above.any() else 1
    return Crossing(
        n0=n0,
        ratios=ratios,
        strictly_decreasing=bool(np.all(np.diff(log_q) < 0.0)),
        sign_changes=sign_changes,
    )


def size_biased_law(law: StationaryLaw) -> np.ndarray:
    """N l(N) / E[N] on the support: the size seen by the first mutation."""
    weighted = law.support * law.probs
    return np.asarray(weighted / weighted.sum())


def first_mutation_rate(law: StationaryLaw, mu: float) -> float:
    """Rate 2 mu E[N] of the first mutation on the accelerated time scale."""
    if not mu > 0:
        raise InvalidParametersError("mutation intensity must be positive", {"mu": mu})
    return 2.0 * mu * law.mean


def write_law_csv(
    law: StationaryLaw, stream: TextIO, comments: Optional[list[str]] = None
) -> int:
    return write_rows(stream, ("N", "prob"), law.rows(), comments)
