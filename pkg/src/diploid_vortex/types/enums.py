"""
Enumeration types for diploid-vortex.
"""

from enum import Enum


class Region(str, Enum):
    """Position of a state relative to the absorbing sets."""

    INTERIOR = "interior"
    LOST = "Gamma_A"  # only AA left: allele a lost
    FIXED = "Gamma_a"  # only aa left: allele a fixed


class Absorption(str, Enum):
    """How a simulated trajectory ended."""

    FIXED = "Gamma_a"
    LOST = "Gamma_A"
    CENSORED = "censored"


class EventType(str, Enum):
    """Transitions of the three-type process, in the fixed sampling order."""

    BIRTH_WILD = "birth-AA"
    BIRTH_HETERO = "birth-Aa"
    BIRTH_MUTANT = "birth-aa"
    DEATH_WILD = "death-AA"
    DEATH_HETERO = "death-Aa"
    DEATH_MUTANT = "death-aa"


#: (dk, dm, dn) for each event, aligned with EventType order.
EVENT_SHIFTS: tuple[tuple[int, int, int], ...] = (
    (1, 0, 0),
    (0, 1, 0),
    (0, 0, 1),
    (-1, 0, 0),
    (0, -1, 0),
    (0, 0, -1),
)

EVENT_ORDER: tuple[EventType, ...] = tuple(EventType)


class FixationMethod(str, Enum):
    """How the ``fixation`` command evaluates u."""

    EXACT = "exact"
    MC = "mc"
    FIRST_ORDER = "first-order"


class TauMethod(str, Enum):
    """How a substitution rate is evaluated."""

    EXACT = "exact"
    LINEAR = "linear"


class TablesSource(str, Enum):
    """Origin of a set of perturbation tables."""

    RECURRENCE = "recurrence"
    ORACLE = "oracle"


class Coupling(str, Enum):
    """Random-number coupling across fixations of a meltdown trajectory."""

    INDEPENDENT = "independent"
    COMMON = "common"


class MicroEventKind(str, Enum):
    """Events recorded by the microscopic simulator."""

    MUTATION = "mutation"
    FIXATION = "fixation"
    LOSS = "loss"


class LogLevel(str, Enum):
    """Logging level."""

    DEBUG = "DEBUG"
    INFO = "INFO"
    WARNING = "WARNING"
    ERROR = "ERROR"
    CRITICAL = "CRITICAL"


class LogFormat(str, Enum):
    """Log output format."""

    TEXT = "text"
    JSON = "json"
