"""
Shared helpers: caching, CSV output, grid parsing, process pools.
"""

from diploid_vortex.utils.cache import clear_caches, law_cache, table_cache
from diploid_vortex.utils.csvio import open_output, provenance_line, read_rows, write_rows
from diploid_vortex.utils.grid import parse_grid
from diploid_vortex.utils.pool import ordered_map

__all__ = [
    "clear_caches",
    "law_cache",
    "table_cache",
    "open_output",
    "provenance_line",
    "read_rows",
    "write_rows",
    "parse_grid",
    "ordered_map",
]
