"""
diploid-vortex - fixation probabilities, substitution rates and extinction-vortex
curves for a three-genotype diploid birth-death population.

This package provides exact lattice solvers, the perturbative matrix recurrences
for the first-order expansion of the fixation probability, the stationary law
of the monomorphic population size, the substitution (meltdown) process and
stochastic simulators, together with the ``diploid-vortex`` command line.
"""

__version__ = "0.1.0"

from diploid_vortex.config.settings import VortexSettings, get_settings, reload_settings
from diploid_vortex.exceptions import DiploidVortexError
from diploid_vortex.types import DemographicParams, GeneralRates, PopulationState

__all__ = [
    "__version__",
    # Configuration
    "VortexSettings",
    "get_settings",
    "reload_settings",
    # Models
    "DemographicParams",
    "GeneralRates",
    "PopulationState",
    # Exceptions
    "DiploidVortexError",
]
