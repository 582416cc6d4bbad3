'''
Reading and writing of field dumps and run reports.

A field dump is a short plain-text header followed by the cell values as
little-endian float64 in C (lexicographic) order:

    CHEMOCONTROL-FIELD 1
    dim 2
    cells 8 8
    spacing 0.125 0.125
    extent 1.0 1.0
    time_index 3
    end
    <n_cells * 8 bytes>

Spacings and extents are written with ``repr`` so that a dump read back
reproduces the grid exactly. A series is stored one node per file as
``<prefix>_<index:05d>.field``.
'''

import csv
import json
from pathlib import Path
from typing import Any, Iterable, Mapping, Optional, Sequence

import numpy as np

from chemocontrol.core.constants import DUMP_DTYPE, DUMP_END, DUMP_MAGIC, DUMP_SUFFIX
from chemocontrol.core.errors import ChemocontrolError, FieldIOError
from chemocontrol.core.grid import Grid, ScalarField

__all__ = [
    'write_field',
    'read_field',
    'series_path',
    'write_series',
    'read_series',
    'write_csv',
    'write_json'
]


def write_field(path: Path | str, field: ScalarField, time_index: int = 0) -> Path:
    '''
    Write one field dump.

    Raises
    ------
    FieldIOError
        If the file cannot be written.
    '''
    path = Path(path)
    grid = field.grid
    header = '\n'.join([
        DUMP_MAGIC,
        f"dim {grid.dim}",
        "cells " + ' '.join(str(n) for n in grid.cells),
        "spacing " + ' '.join(repr(h) for h in grid.spacing),
        "extent " + ' '.join(repr(x) for x in grid.extent),
        f"time_index {int(time_index)}",
        DUMP_END,
    ]) + '\n'
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open('wb') as stream:
            stream.write(header.encode('ascii'))
            stream.write(np.ascontiguousarray(field.values, dtype=DUMP_DTYPE).tobytes())
    except OSError as exc:
        raise FieldIOError(f"Cannot write field dump '{path}': {exc}") from exc
    return path


def _parse_header(path: Path, lines: list[str]) -> tuple[Grid, int]:
    if not lines or lines[0] != DUMP_MAGIC:
        raise FieldIOError(f"'{path}' is not a field dump.")
    entries: dict[str, list[str]] = {}
    for line in lines[1:]:
        if line.strip():
            key, *values = line.split()
            entries[key] = values
    try:
        dim = int(entries['dim'][0])
        cells = tuple(int(n) for n in entries['cells'])
        spacing = tuple(float(h) for h in entries['spacing'])
        extent = tuple(float(x) for x in entries['extent'])
        time_index = int(entries['time_index'][0])
    except (KeyError, IndexError, ValueError) as exc:
        raise FieldIOError(f"Malformed header in '{path}'.") from exc
    if not len(cells) == len(spacing) == len(extent) == dim:
        raise FieldIOError(f"Header of '{path}' disagrees with its dimension {dim}.")
    try:
        grid = Grid(cells, extent)
    except ChemocontrolError as exc:
        raise FieldIOError(f"Header of '{path}' describes no valid grid: {exc}") from exc
    return grid, time_index


def read_field(path: Path | str, grid: Optional[Grid] = None) -> tuple[ScalarField, int]:
    '''
    Read one field dump.

    Parameters
    ----------
    path : Path | str
        The dump file.
    grid : Grid, optional
        When given, the dump must have the same cell counts and extents.

    Returns
    -------
    tuple[ScalarField, int]
        The field and its time index.

    Raises
    ------
    FieldIOError
        If the file is missing, corrupt or does not match ``grid``.
    '''
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise FieldIOError(f"Cannot read field dump '{path}': {exc}") from exc

    lines: list[str] = []
    offset = 0
    while True:
        end = raw.find(b'\n', offset)
        if end < 0:
            raise FieldIOError(f"'{path}' has no header terminator.")
        try:
            line = raw[offset:end].decode('ascii')
        except UnicodeDecodeError as exc:
            raise FieldIOError(f"'{path}' has a corrupt header.") from exc
        offset = end + 1
        if line == DUMP_END:
            break
        lines.append(line)

    dump_grid, time_index = _parse_header(path, lines)
    if grid is not None and (grid.cells != dump_grid.cells or grid.extent != dump_grid.extent):
        raise FieldIOError(
            f"'{path}' holds a {dump_grid.cells} field on {dump_grid.extent}, "
            f"expected {grid.cells} on {grid.extent}.")
    body = raw[offset:]
    expected = dump_grid.n_cells * np.dtype(DUMP_DTYPE).itemsize
    if len(body) != expected:
        raise FieldIOError(f"'{path}' holds {len(body)} data bytes, expected {expected}.")
    values = np.frombuffer(body, dtype=DUMP_DTYPE).astype(float).reshape(dump_grid.cells)
    if not np.all(np.isfinite(values)):
        raise FieldIOError(f"'{path}' contains non-finite values.")
    return ScalarField(grid or dump_grid, values), time_index


def series_path(directory: Path | str, prefix: str, index: int) -> Path:
    return Path(directory) / f"{prefix}_{index:05d}{DUMP_SUFFIX}"


def write_series(directory: Path | str, prefix: str, grid: Grid, series: np.ndarray) -> list[Path]:
    '''Dump every node of a ``(nodes, *cells)`` series.'''
    return [
        write_field(series_path(directory, prefix, n), ScalarField(grid, values), n)
        for n, values in enumerate(series)]


def read_series(directory: Path | str, prefix: str, grid: Grid, nodes: int) -> np.ndarray:
    '''
    Read the dumps ``prefix_00000`` to ``prefix_<nodes-1>`` into a
    ``(nodes, *cells)`` array.

    Raises
    ------
    FieldIOError
        If a dump is missing, does not match the grid or carries the wrong
        time index.
    '''
    out = np.empty((nodes, *grid.cells))
    for n in range(nodes):
        path = series_path(directory, prefix, n)
        field, index = read_field(path, grid)
        if index != n:
            raise FieldIOError(f"'{path}' carries time index {index}, expected {n}.")
        out[n] = field.values
    return out


def write_csv(path: Path | str, columns: Sequence[str], records: Iterable[Mapping[str, Any]]) -> Path:
    '''
    Write records as CSV with the given column order. Floats are written
    with ``repr`` so that reruns are byte-identical.
    '''
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open('w', newline='') as stream:
            writer = csv.writer(stream, lineterminator='\n')
            writer.writerow(columns)
            for record in records:
                writer.writerow([repr(record[key]) if isinstance(record[key], float) else record[key]
                                 for key in columns])
    except OSError as exc:
        raise FieldIOError(f"Cannot write '{path}': {exc}") from exc
    return path


def write_json(path: Path | str, data: Mapping[str, Any]) -> Path:
    '''Write a JSON document with sorted keys.'''
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(data, indent=2, sort_keys=True) + '\n')
    except OSError as exc:
        raise FieldIOError(f"Cannot write '{path}': {exc}") from exc
    return path
