import json
from pathlib import Path

import numpy as np
import pytest

from chemocontrol.core import field_io
from chemocontrol.core.errors import FieldIOError
from chemocontrol.core.grid import Grid, ScalarField

params = pytest.mark.parametrize


@params(
    'cells, extent', [
        ((7,), (0.3,)),
        ((3, 5), (1.0, 0.7)),
        ((2, 3, 4), (1.1, 2.2, 3.3)),
    ]
)
def test_field_dump_is_exact(tmp_path: Path, cells: tuple[int, ...], extent: tuple[float, ...]) -> None:
    grid = Grid(cells, extent)
    values = np.random.default_rng(0).standard_normal(cells) * 1e3
    path = field_io.write_field(tmp_path / 'w.field', ScalarField(grid, values), time_index=4)

    field, index = field_io.read_field(path)
    assert index == 4
    assert field.grid == grid
    assert np.array_equal(field.values, values)


def test_read_field_checks_the_grid(tmp_path: Path) -> None:
    grid = Grid((4,), (1.0,))
    path = field_io.write_field(tmp_path / 'w.field', ScalarField.constant(grid, 1.0))
    with pytest.raises(FieldIOError):
        field_io.read_field(path, Grid((5,), (1.0,)))
    with pytest.raises(FieldIOError):
        field_io.read_field(path, Grid((4,), (2.0,)))


def test_read_field_missing_file(tmp_path: Path) -> None:
    with pytest.raises(FieldIOError) as info:
        field_io.read_field(tmp_path / 'absent.field')
    assert info.value.category == 'io'


@params(
    'raw', [
        b'',
        b'not a dump\nend\n',
        b'CHEMOCONTROL-FIELD 1\ndim 1\ncells 2\nspacing 0.5\nextent 1.0\ntime_index 0\n',
        b'CHEMOCONTROL-FIELD 1\ndim 1\ncells 2\nspacing 0.5\nextent 1.0\ntime_index 0\nend\n' + b'\x00' * 15,
        b'CHEMOCONTROL-FIELD 1\ndim 2\ncells 2\nspacing 0.5\nextent 1.0\ntime_index 0\nend\n' + b'\x00' * 16,
        b'CHEMOCONTROL-FIELD 1\ndim 1\ncells two\nspacing 0.5\nextent 1.0\ntime_index 0\nend\n',
        b'CHEMOCONTROL-FIELD 1\ndim 1\ncells 0\nspacing 0.5\nextent 1.0\ntime_index 0\nend\n',
        b'CHEMOCONTROL-FIELD 1\ndim 1\ncells 1\nspacing 1.0\nextent 1.0\ntime_index 0\nend\n'
        + np.array([np.nan]).astype('<f8').tobytes(),
    ]
)
def test_read_field_rejects_corrupt_dumps(tmp_path: Path, raw: bytes) -> None:
    path = tmp_path / 'bad.field'
    path.write_bytes(raw)
    with pytest.raises(FieldIOError):
        field_io.read_field(path)


def test_series_round_trip(tmp_path: Path) -> None:
    grid = Grid((3, 2), (1.0, 1.0))
    series = np.random.default_rng(1).uniform(0.0, 2.0, (4, 3, 2))
    paths = field_io.write_series(tmp_path, 'u', grid, series)
    assert [p.name for p in paths] == [f'u_{n:05d}.field' for n in range(4)]
    assert np.array_equal(field_io.read_series(tmp_path, 'u', grid, 4), series)


def test_read_series_checks_indices(tmp_path: Path) -> None:
    grid = Grid((3,), (1.0,))
    field_io.write_series(tmp_path, 'v', grid, np.ones((3, 3)))
    field_io.write_field(field_io.series_path(tmp_path, 'v', 1), ScalarField.constant(grid, 2.0), 7)
    with pytest.raises(FieldIOError):
        field_io.read_series(tmp_path, 'v', grid, 3)
    with pytest.raises(FieldIOError):
        field_io.read_series(tmp_path, 'v', grid, 4)


def test_csv_is_deterministic(tmp_path: Path) -> None:
    records = [{'time': 0.1, 'mass': 1.0 / 3.0, 'iter': 1}, {'time': 0.2, 'mass': 2.0 / 3.0, 'iter': 2}]
    first = field_io.write_csv(tmp_path / 'a.csv', ['iter', 'time', 'mass'], records)
    second = field_io.write_csv(tmp_path / 'b.csv', ['iter', 'time', 'mass'], records)
    assert first.read_bytes() == second.read_bytes()
    lines = first.read_text().splitlines()
    assert lines[0] == 'iter,time,mass'
    assert lines[1] == f"1,0.1,{1.0 / 3.0!r}"
    assert float(lines[2].split(',')[2]) == 2.0 / 3.0


def test_json_sorts_keys(tmp_path: Path) -> None:
    path = field_io.write_json(tmp_path / 'nested' / 'summary.json', {'b': 1, 'a': {'d': 2.5, 'c': None}})
    text = path.read_text()
    assert text.index('"a"') < text.index('"b"')
    assert text.index('"c"') < text.index('"d"')
    assert json.loads(text) == {'a': {'c': None, 'd': 2.5}, 'b': 1}
