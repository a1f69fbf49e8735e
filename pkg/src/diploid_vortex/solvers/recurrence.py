"""
Two-by-two block recurrences for the first-order coefficients of the
fixation probability, and the sweep that solves them.

Both layers have the form

    B_N z_{N+1} = C_N z_N + D_N z_{N-1} + f_N        (N >= 4, resp. N >= 3)

closed at the bottom by a modified block. Eliminating downwards gives
``B_N z_{N+1} = (C_N + K_N) z_N + r_N`` with K_{N+1} = D_{N+1} F_N^-1 B_N,
F_N = C_N + K_N, and the sub-polynomial solution is recovered by summing the
contracting tail backwards from a level L where the remainder is negligible.
"""

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from diploid_vortex.exceptions import SingularSystemError, TailNotConvergedError
from diploid_vortex.logging import get_logger
from diploid_vortex.types.models import DemographicParams

logger = get_logger(__name__)

EPS = float(np.finfo(np.float64).eps)
DET_FLOOR = 1e-300
COND_LIMIT = 1e-3 / EPS
TAIL_SAFETY = 1e-3


class Blocks(NamedTuple):
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    f: np.ndarray


def row_norm(a: np.ndarray) -> float:
    """sup_i sum_j |a_ij|, or the max-abs entry of a vector."""
    return float(np.max(np.sum(np.abs(np.atleast_2d(a)), axis=-1)))


def vector_norm(v: np.ndarray) -> float:
    return float(np.max(np.abs(v)))


def inv2(a: np.ndarray, what: str = "2x2 block") -> np.ndarray:
    """Inverse by the adjugate formula."""
    det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    if not abs(det) >= DET_FLOOR:
        raise SingularSystemError(what, details={"what": what, "det": float(det)})
    return np.array([[a[1, 1], -a[0, 1]], [-a[1, 0], a[0, 0]]]) / det


def condition2(a: np.ndarray, what: str = "2x2 block") -> float:
    return row_norm(a) * row_norm(inv2(a, what))


def _death(size: int, params: DemographicParams) -> float:
    return params.d + params.c * (size - 1)


def first_layer(size: int, params: DemographicParams) -> Blocks:
    """Blocks of the recurrence satisfied by z_N = (x_N, y_N), for N >= 3."""
    if size < 3:
        raise ValueError("first-layer blocks exist for N >= 3")
    b = params.b
    n = float(size)
    mu = _death(size, params)
    big_b = (b / (2.0 * (n - 1.0) * (n + 1.0))) * np.array(
        [
            [1.0, (2.0 * n * n + 4.0 * n - 3.0) / (n + 1.0)],
            [2.0 * n * n - 3.0, -3.0 / (n + 1.0)],
        ]
    )
    big_c = (b + mu) * np.array([[0.0, 1.0 / n], [1.0, 0.0]])
    big_d = -(mu / (n - 1.0)) * np.array(
        [[0.0, (n - 3.0) / (n - 1.0)], [n - 2.0, 3.0 / (n - 1.0)]]
    )
    f = np.array([0.0, -1.0 / (2.0 * n * (n - 1.0))])
    return Blocks(big_b, big_c, big_d, f)


def first_layer_start(params: DemographicParams) -> tuple[np.ndarray, np.ndarray]:
    """Bottom closure (C~_3, f~_3) of the first layer."""
    blocks = first_layer(3, params)
    mu3 = _death(3, params)
    c_tilde = blocks.C - np.array([[0.0, 0.0], [2.0 * mu3 / 3.0, mu3]])
    return c_tilde, blocks.f.copy()


def second_layer(
    size: int,
    params: DemographicParams,
    y_prev: float,
    y_here: float,
    y_next: float,
) -> Blocks:
    """Blocks of the recurrence for z'_N = (x'_N, y'_N), N >= 3; f' uses y_{N-1..N+1}."""
    if size < 3:
        raise ValueError("second-layer blocks exist for N >= 3")
    b = params.b
    n = float(size)
    mu = _death(size, params)
    big_b = (b / (n - 1.0)) * np.array(
        [
            [2.0 * n * n - 2.0 * n - 1.0, -1.0 / (n + 1.0)],
            [0.5, (n * n + n - 1.5) / (n + 1.0)],
        ]
    )
    big_c = n * (b + mu) * np.array([[2.0, 0.0], [0.0, 1.0 / n]])
    big_d = -mu * np.array([[2.0 * n - 2.0, 2.0 / (n - 1.0)], [0.0, (n - 2.0) / (n - 1.0)]])

    up = (b / (n - 1.0)) * y_next / (2.0 * (n + 1.0) ** 2)
    down = mu * y_prev / (2.0 * (n - 1.0) ** 2)
    f = np.array(
        [
            up * (2.0 * n - 1.0) - down * (4.0 * n + 2.0),
            up * (2.0 * n**3 + 3.0 * n * n - 4.0 * n - 1.5)
            - (b + mu) * (2.0 * n - 1.0) * y_here / (2.0 * n)
            + down * (2.0 * n * n - 7.0 * n + 8.0),
        ]
    )
    return Blocks(big_b, big_c, big_d, f)


def second_layer_start(
    x2: float, y2: float, x3: float, y3: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Bottom closure (B~'_2, C~'_2, f~'_2) at N = 2, where only births act. Only
    x2 + 1.5 * y2 is determined; the caller fixes the split.
    """
    b_tilde = np.array([[1.0, 3.0], [3.0, 13.0 / 3.0]])
    c_tilde = np.array([[0.0, 2.0], [2.0, 3.0]])
    f_tilde = np.array([x2 - y2 - x3 + 1.5 * y3, (19.0 / 6.0) * y3 - 2.25 * y2])
    return b_tilde, c_tilde, f_tilde


@dataclass
class TailSweep:
    """Forward elimination data and the backward-summed solution, level by level."""

    first_level: int
    z: np.ndarray
    K: np.ndarray
    M_inv: np.ndarray
    g: np.ndarray
    cond_f: np.ndarray
    tail_estimate: float
    l_max: int

    @property
    def last_level(self) -> int:
        return self.first_level + len(self.z) - 1

    @property
    def levels(self) -> np.ndarray:
        return np.arange(self.first_level, self.last_level + 1)

    def at(self, size: int) -> np.ndarray:
        if not self.first_level <= size <= self.last_level:
            raise IndexError(f"level {size} outside [{self.first_level}, {self.last_level}]")
        return self.z[size - self.first_level]


def tail_sweep(
    blocks: Callable[[int], Blocks],
    k_start: np.ndarray,
    r_start: np.ndarray,
    n_out: int,
    tol: float,
    l_max: int,
    layer: str,
    first_level: int = 3,
) -> TailSweep:
    """
    Eliminate forward until the neglected tail is below ``TAIL_SAFETY * tol``
    (and at least one level past ``n_out``), then sum backwards.

    Truncating at L perturbs z_N by at most
    prod_{l=N}^{L} ||M_l^-1|| * rho_L ||g_L|| / (1 - rho_L), rho_L = ||M_L^-1||.
    ``reach`` tracks the largest of these products over the output levels
    N <= n_out; past n_out it only accumulates.
    """
    size = first_level
    current = blocks(size)
    k_mat = np.asarray(k_start, dtype=np.float64)
    r_vec = np.asarray(r_start, dtype=np.float64)

    ks, m_invs, gs, conds = [], [], [], []
    reach = 0.0
    estimate = float("inf")
    while True:
        f_mat = current.C + k_mat
        cond = condition2(f_mat, f"F_{size} ({layer} layer)")
        if cond > COND_LIMIT:
            raise SingularSystemError(
                f"F_{size} ({layer} layer)", details={"level": size, "condition": cond}
            )
        f_inv = inv2(f_mat, f"F_{size}")
        m_inv = f_inv @ current.B
        g = inv2(current.B, f"B_{size}") @ r_vec

        ks.append(k_mat)
        m_invs.append(m_inv)
        gs.append(g)
        conds.append(cond)

        rho = row_norm(m_inv)
        reach = rho * (max(1.0, reach) if size <= max(n_out, first_level) else reach)
        if reach > 1.0 / EPS:
            raise TailNotConvergedError(size, l_max, reach)
        if rho < 1.0:
            estimate = reach * rho * vector_norm(g) / (1.0 - rho)
        else:
            estimate = float("inf")

        if size >= n_out + 1 and estimate < TAIL_SAFETY * tol:
            break
        if size >= l_max:
            raise TailNotConvergedError(size, l_max, estimate)

        nxt = blocks(size + 1)
        coupling = nxt.D @ f_inv
        k_mat = coupling @ current.B
        r_vec = nxt.f - coupling @ r_vec
        current = nxt
        size += 1

    total = np.zeros(2)
    z = np.zeros((len(gs), 2))
    for i in range(len(gs) - 1, -1, -1):
        total = m_invs[i] @ (gs[i] + total)
        z[i] = -total

    logger.debug(
        "Tail sweep converged",
        extra={"layer": layer, "l_used": size, "tail_estimate": estimate},
    )
    return TailSweep(
        first_level=first_level,
        z=z,
        K=np.array(ks),
        M_inv=np.array(m_invs),
        g=np.array(gs),
        cond_f=np.array(conds),
        tail_estimate=estimate,
        l_max=l_max,
    )


def forward_first_layer(
    params: DemographicParams, last_level: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """
    K_N, ||M_N^-1||, cond(F_N) and g_N of the first layer for N = 3..last_level,
    without the backward pass.
    """
    c_tilde, r_vec = first_layer_start(params)
    current = first_layer(3, params)
    k_mat = c_tilde - current.C
    ks, norm_m, conds, gs = [], [], [], []
    for size in range(3, last_level + 1):
        f_mat = current.C + k_mat
        f_inv = inv2(f_mat, f"F_{size}")
        ks.append(k_mat)
        norm_m.append(row_norm(f_inv @ current.B))
        conds.append(row_norm(f_mat) * row_norm(f_inv))
        gs.append(inv2(current.B, f"B_{size}") @ r_vec)
        if size == last_level:
            break
        nxt = first_layer(size + 1, params)
        coupling = nxt.D @ f_inv
        k_mat = coupling @ current.B
        r_vec = nxt.f - coupling @ r_vec
        current = nxt
    return np.array(ks), np.array(norm_m), np.array(conds), np.array(gs)
