"""
Model core: rates, generator, absorbing sets and the truncated lattice.
"""

from diploid_vortex.core.lattice import TruncatedLattice, lattice_size
from diploid_vortex.core.model import (
    apply_generator,
    as_general,
    birth_rates,
    classify,
    death_rates,
    event_rate_arrays,
    event_rates,
    neutral_fixation,
    transitions,
)

__all__ = [
    "TruncatedLattice",
    "lattice_size",
    "apply_generator",
    "as_general",
    "birth_rates",
    "classify",
    "death_rates",
    "event_rate_arrays",
    "event_rates",
    "neutral_fixation",
    "transitions",
]
