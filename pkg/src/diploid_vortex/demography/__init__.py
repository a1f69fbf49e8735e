"""
Population-size law of the monomorphic logistic process.
"""

from diploid_vortex.demography.stationary import (
    crossing_index,
    first_mutation_rate,
    log_weights,
    size_biased_law,
    stationary_law,
    write_law_csv,
)

__all__ = [
    "crossing_index",
    "first_mutation_rate",
    "log_weights",
    "size_biased_law",
    "stationary_law",
    "write_law_csv",
]
