"""
Stochastic simulators: the three-type process, the substitution (meltdown)
process and the individual-based model with per-strand mutations.
"""

from diploid_vortex.simulate.gillespie import (
    draw_event_counts,
    mc_fixation,
    run_to_absorption,
    trajectory,
    write_trajectory_csv,
)
from diploid_vortex.simulate.meltdown import (
    meltdown_rates,
    pooled_meltdown,
    simulate_meltdown,
    write_meltdown_csv,
)
from diploid_vortex.simulate.microscopic import MicroPopulation, simulate_microscopic
from diploid_vortex.simulate.rng import RngStream

__all__ = [
    "draw_event_counts",
    "mc_fixation",
    "run_to_absorption",
    "trajectory",
    "write_trajectory_csv",
    "meltdown_rates",
    "pooled_meltdown",
    "simulate_meltdown",
    "write_meltdown_csv",
    "MicroPopulation",
    "simulate_microscopic",
    "RngStream",
]
