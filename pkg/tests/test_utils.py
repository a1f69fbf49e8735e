import io

import numpy as np
import pytest

from diploid_vortex.exceptions import InvalidGridError
from diploid_vortex.types.enums import TauMethod
from diploid_vortex.utils.cache import ResultCache
from diploid_vortex.utils.csvio import (
    format_cell,
    open_output,
    provenance_line,
    read_rows,
    write_rows,
)
from diploid_vortex.utils.grid import parse_grid
from diploid_vortex.utils.pool import ordered_map


def square(x):
    return x * x


def test_parse_range_grid():
    assert parse_grid("0.5:3.0:0.5") == [0.5, 1.0, 1.5, 2.0, 2.5, 3.0]
    assert parse_grid("0:0.3:0.1") == [0.0, 0.1, 0.2, 0.3]
    assert parse_grid("1:1:0.5") == [1.0]


def test_parse_comma_grid():
    assert parse_grid("0.5, 1, 2.25") == [0.5, 1.0, 2.25]


@pytest.mark.parametrize("spec", ["1:2", "a:b:c", "1:2:0", "2:1:0.5", "1,1", "2,1", "x,1"])
def test_rejected_grids(spec):
    with pytest.raises(InvalidGridError):
        parse_grid(spec)


def test_format_cell():
    assert format_cell(0.1) == "0.1"
    assert format_cell(np.float64(1 / 3)) == repr(1 / 3)
    assert format_cell(np.int64(7)) == "7"
    assert format_cell(True) == "true"
    assert format_cell(TauMethod.LINEAR) == "linear"
    assert format_cell("") == ""


def test_provenance_line_keeps_order():
    assert provenance_line(command="tau", b=1.0, method=TauMethod.EXACT) == (
        "# command=tau b=1.0 method=exact"
    )


def test_write_rows():
    out = io.StringIO()
    count = write_rows(out, ("a", "b"), [(1, 0.5), (2, 1e-20)], ["# x=1", "plain"])

    assert count == 2
    assert out.getvalue() == "# x=1\n# plain\na,b\n1,0.5\n2,1e-20\n"


def test_file_output_round_trip(tmp_path):
    path = tmp_path / "nested" / "rows.csv"
    with open_output(str(path)) as stream:
        write_rows(stream, ("N", "prob"), [(2, 0.25)], ["# command=stationary"])

    assert read_rows(str(path)) == (["N", "prob"], [["2", "0.25"]])


def test_result_cache_counts_hits():
    cache = ResultCache("test", 2)
    calls = []

    def compute():
        calls.append(1)
        return "value"

    assert cache.get_or_compute("k", compute) == "value"
    assert cache.get_or_compute("k", compute) == "value"
    assert len(calls) == 1
    assert (cache.hits, cache.misses) == (1, 1)
    cache.clear()
    assert cache.get("k") is None


def test_result_cache_evicts_least_recent():
    cache = ResultCache("test", 2)
    for key in ("a", "b", "c"):
        cache.set(key, key.upper())

    assert cache.get("a") is None
    assert cache.get("c") == "C"


def test_cache_can_be_disabled(settings_env):
    settings_env(DIPLOID_VORTEX_CACHE_ENABLED="false")
    cache = ResultCache("test", 2)
    calls = []

    cache.get_or_compute("k", lambda: calls.append(1))
    cache.get_or_compute("k", lambda: calls.append(1))
    assert len(calls) == 2


def test_ordered_map_serial():
    assert ordered_map(square, range(5)) == [0, 1, 4, 9, 16]
    assert ordered_map(square, []) == []


@pytest.mark.slow
def test_ordered_map_parallel_keeps_order():
    assert ordered_map(square, range(20), workers=2) == [x * x for x in range(20)]
