"""
Bijective index over the truncated state space {(k, m, n) : 2 <= k + m + n <= N_max}.

States are ordered by population size N, then by k, then by m. Within level N
the position of (k, m) is k(N + 1) - k(k - 1)/2 + m.
"""

import numpy as np

from diploid_vortex.exceptions import LatticeTooSmallError, TableRangeError
from diploid_vortex.types.enums import Region
from diploid_vortex.types.models import PopulationState


def level_size(size: int) -> int:
    return (size + 1) * (size + 2) // 2


def lattice_size(n_max: int) -> int:
    """Number of states with 2 <= N <= n_max."""
    return sum(level_size(size) for size in range(2, n_max + 1))


class TruncatedLattice:
    """Coordinates of every state up to ``n_max`` as parallel int64 arrays."""

    MIN_N_MAX = 4

    def __init__(self, n_max: int):
        if n_max < self.MIN_N_MAX:
            raise LatticeTooSmallError(n_max, self.MIN_N_MAX)
        self.n_max = int(n_max)
        self._offsets = np.zeros(self.n_max + 2, dtype=np.int64)
        for size in range(2, self.n_max + 1):
            self._offsets[size + 1] = self._offsets[size] + level_size(size)
        self.size = int(self._offsets[self.n_max + 1])

        ks, ms = [], []
        for size in range(2, self.n_max + 1):
            k = np.repeat(np.arange(size + 1, dtype=np.int64), np.arange(size + 1, 0, -1))
            block_start = k * (size + 1) - k * (k - 1) // 2
            ks.append(k)
            ms.append(np.arange(level_size(size), dtype=np.int64) - block_start)
        self.k = np.concatenate(ks)
        self.m = np.concatenate(ms)
        self.N = np.repeat(
            np.arange(2, self.n_max + 1, dtype=np.int64),
            [level_size(size) for size in range(2, self.n_max + 1)],
        )
        self.n = self.N - self.k - self.m

        self.gamma_lost = (self.m == 0) & (self.n == 0)
        self.gamma_fixed = (self.k == 0) & (self.m == 0)
        self.interior = ~(self.gamma_lost | self.gamma_fixed)

    def __len__(self) -> int:
        return self.size

    def __repr__(self) -> str:
        return f"TruncatedLattice(n_max={self.n_max}, size={self.size})"

    def offset(self, size: int) -> int:
        return int(self._offsets[size])

    def level_slice(self, size: int) -> slice:
        if not 2 <= size <= self.n_max:
            raise TableRangeError(size, 2, self.n_max, "lattice")
        return slice(int(self._offsets[size]), int(self._offsets[size + 1]))

    def index_array(self, k: np.ndarray, m: np.ndarray, n: np.ndarray) -> np.ndarray:
        """Vectorised index; callers guarantee 2 <= k + m + n <= n_max."""
        size = k + m + n
        return self._offsets[size] + k * (size + 1) - k * (k - 1) // 2 + m

    def index(self, k: int, m: int, n: int) -> int:
        size = k + m + n
        if min(k, m, n) < 0 or not 2 <= size <= self.n_max:
            raise TableRangeError(size, 2, self.n_max, "lattice")
        return int(self._offsets[size]) + k * (size + 1) - k * (k - 1) // 2 + m

    def index_of(self, state: PopulationState) -> int:
        return self.index(state.k, state.m, state.n)

    def state(self, index: int) -> PopulationState:
        return PopulationState(k=int(self.k[index]), m=int(self.m[index]), n=int(self.n[index]))

    def region(self, index: int) -> Region:
        if self.gamma_lost[index]:
            return Region.LOST
        if self.gamma_fixed[index]:
            return Region.FIXED
        return Region.INTERIOR
