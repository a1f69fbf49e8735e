"""
Domain types: enums and the core pydantic models.

Result containers live in ``diploid_vortex.types.results``.
"""

from diploid_vortex.types.enums import (
    Absorption,
    Coupling,
    EventType,
    FixationMethod,
    MicroEventKind,
    Region,
    TablesSource,
    TauMethod,
)
from diploid_vortex.types.models import (
    DemographicParams,
    GeneralRates,
    PopulationState,
    Transition,
    TransitionSet,
)

__all__ = [
    "Absorption",
    "Coupling",
    "EventType",
    "FixationMethod",
    "MicroEventKind",
    "Region",
    "TablesSource",
    "TauMethod",
    "DemographicParams",
    "GeneralRates",
    "PopulationState",
    "Transition",
    "TransitionSet",
]
