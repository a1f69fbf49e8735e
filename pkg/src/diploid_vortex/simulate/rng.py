"""
Reproducible random streams keyed by (seed, stream_id).

Each stream is a counter-based Philox generator seeded from the pair, so
replicate r draws the same numbers whichever process runs it. Uniforms are
drawn in blocks; exponentials use the inverse CDF and categorical draws scan
the cumulative weights in the given order.
"""

import math
from typing import Optional, Sequence

import numpy as np

from diploid_vortex.config.settings import get_settings
from diploid_vortex.exceptions import InvalidParametersError


class RngStream:
    """Buffered uniform source for one replicate."""

    def __init__(self, seed: int, stream_id: int = 0, buffer: Optional[int] = None):
        if seed < 0 or stream_id < 0:
            raise InvalidParametersError(
                "seed and stream id must be nonnegative", {"seed": seed, "stream_id": stream_id}
            )
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        self._buffer_size = buffer or get_settings().simulation.rng_buffer
        bit_generator = np.random.Philox(np.random.SeedSequence([self.seed, self.stream_id]))
        self._generator = np.random.Generator(bit_generator)
        self._block = np.empty(0)
        self._pos = 0

    def uniform(self) -> float:
        """A uniform on [0, 1)."""
        if self._pos >= len(self._block):
            self._block = self._generator.random(self._buffer_size)
            self._pos = 0
        value = float(self._block[self._pos])
        self._pos += 1
        return value

    def exponential(self, rate: float = 1.0) -> float:
        return -math.log1p(-self.uniform()) / rate

    def categorical(self, weights: Sequence[float], total: Optional[float] = None) -> int:
        """Index i with probability weights[i] / total; zero weights are never picked."""
        total = float(sum(weights)) if total is None else total
        target = self.uniform() * total
        acc = 0.0
        last = -1
        for i, w in enumerate(weights):
            if w <= 0.0:
                continue
            acc += w
            last = i
            if target < acc:
                return i
        # rounding can leave target just above the running sum
        return last

    def integer(self, upper: int) -> int:
        """Uniform integer in [0, upper)."""
        return min(int(self.uniform() * upper), upper - 1)
