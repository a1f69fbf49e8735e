"""
CSV emission shared by every command.

Floats are written with ``repr`` so output is byte-stable for fixed inputs;
provenance lines start with ``#`` and precede the header.
"""

import csv
import sys
from contextlib import contextmanager
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Iterator, Optional, Sequence, TextIO

import numpy as np


def format_cell(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, np.integer):
        return str(int(value))
    if isinstance(value, Enum):
        return str(value.value)
    return str(value)


def provenance_line(**flags: Any) -> str:
    """``# key=value key=value`` in the given order."""
    return "# " + " ".join(f"{key}={format_cell(value)}" for key, value in flags.items())


def write_rows(
    stream: TextIO,
    header: Sequence[str],
    rows: Iterable[Sequence[Any]],
    comments: Optional[Sequence[str]] = None,
) -> int:
    """Write comment lines, header and rows; returns the number of data rows."""
    for line in comments or ():
        stream.write(line if line.startswith("#") else f"# {line}")
        stream.write("\n")
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    count = 0
    for row in rows:
        writer.writerow([format_cell(cell) for cell in row])
        count += 1
    return count


@contextmanager
def open_output(path: Optional[str]) -> Iterator[TextIO]:
    """Yield stdout when ``path`` is None or ``-``, else a file opened for writing."""
    if path is None or path == "-":
        yield sys.stdout
        sys.stdout.flush()
        return
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with target.open("w", newline="", encoding="utf-8") as handle:
        yield handle


def read_rows(path: str) -> tuple[list[str], list[list[str]]]:
    """Header and data rows of a CSV written by ``write_rows``; comments skipped."""
    with open(path, newline="", encoding="utf-8") as handle:
        lines = [line for line in handle if not line.startswith("#")]
    reader = csv.reader(lines)
    header = next(reader)
    return header, [row for row in reader]
