"""
Parsing of ``start:stop:step`` grids.
"""

import numpy as np

from diploid_vortex.exceptions import InvalidGridError


def parse_grid(spec: str) -> list[float]:
    """
    Expand ``start:stop:step`` into an increasing list of floats, endpoints
    included within half a step. A comma-separated list is accepted as well.
    """
    text = spec.strip()
    if "," in text:
        try:
            values = [float(part) for part in text.split(",") if part.strip()]
        except ValueError:
            raise InvalidGridError(spec, "entries must be numbers")
        return _checked(spec, values)

    parts = text.split(":")
    if len(parts) != 3:
        raise InvalidGridError(spec, "expected start:stop:step")
    try:
        start, stop, step = (float(part) for part in parts)
    except ValueError:
        raise InvalidGridError(spec, "start, stop and step must be numbers")
    if not step > 0:
        raise InvalidGridError(spec, "step must be positive")
    if stop < start:
        raise InvalidGridError(spec, "stop must not be below start")

    count = int(np.floor((stop - start) / step + 0.5)) + 1
    values = [round(start + i * step, 12) for i in range(count)]
    return _checked(spec, values)


def _checked(spec: str, values: list[float]) -> list[float]:
    if not values:
        raise InvalidGridError(spec, "grid is empty")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise InvalidGridError(spec, "grid must be strictly increasing")
    return values
