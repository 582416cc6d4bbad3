# pylint: disable=missing-function-docstring,line-too-long,missing-module-docstring,invalid-name,redefined-outer-name
import csv
import json
from pathlib import Path

import numpy as np
import pytest

from chemocontrol import api
from chemocontrol.api.config import load_config, parse_config
from chemocontrol.core.constants import DIAGNOSTICS_COLUMNS, ENERGY_COLUMNS, ITERATION_COLUMNS
from chemocontrol.core.errors import CFLError, FieldIOError
from chemocontrol.core.field_io import read_series

params = pytest.mark.parametrize


def read_rows(path: Path) -> list[dict[str, str]]:
    with path.open(newline='') as stream:
        return list(csv.DictReader(stream))


def test_run_forward(tmp_path: Path, small_run: dict) -> None:
    config = parse_config(small_run, tmp_path)
    summary = api.run_forward(config, tmp_path / 'fwd')

    rows = read_rows(tmp_path / 'fwd' / 'diagnostics.csv')
    assert list(rows[0]) == list(DIAGNOSTICS_COLUMNS)
    assert len(rows) == config.time_grid.nodes
    masses = [float(row['mass']) for row in rows]
    assert max(masses) - min(masses) <= 1e-8 * masses[0]

    assert summary['command'] == 'forward'
    assert summary['steps'] == 10
    assert summary['dt'] == pytest.approx(0.005)
    assert summary['admissible_dt'] > summary['dt']
    assert summary['final_mass'] == pytest.approx(masses[-1], rel=1e-15)
    assert summary['final_min_u'] >= 0.0
    assert summary['control_lq'] == pytest.approx(0.25 * (0.5 * 0.05) ** (1.0 / 3.0), rel=1e-12)
    on_disk = json.loads((tmp_path / 'fwd' / 'summary.json').read_text())
    assert on_disk['final_mass'] == summary['final_mass']
    assert on_disk['config']['time'] == {'T': 0.05, 'steps': 10}
    assert not (tmp_path / 'fwd' / 'fields').exists()


def test_run_forward_dumps_fields(tmp_path: Path, small_run: dict) -> None:
    small_run['output'] = {'directory': 'out', 'dump_fields': True}
    config = parse_config(small_run, tmp_path)
    api.run_forward(config)
    fields = tmp_path / 'out' / 'fields'
    nodes = config.time_grid.nodes
    assert len(list(fields.glob('u_*.field'))) == nodes
    f = read_series(fields, 'f', config.grid, nodes)
    assert np.array_equal(f, config.f0.values)


def test_run_diagnose(tmp_path: Path, small_run: dict) -> None:
    config = parse_config(small_run, tmp_path)
    summary = api.run_diagnose(config, tmp_path)

    assert summary['command'] == 'diagnose'
    assert summary['min_z'] >= config.params.alpha
    rows = read_rows(tmp_path / 'energy.csv')
    assert list(rows[0]) == list(ENERGY_COLUMNS)
    assert len(rows) == config.time_grid.nodes
    cumulative = [float(row['dissipation_cum']) for row in rows]
    assert cumulative[0] == 0.0
    assert all(b >= a for a, b in zip(cumulative, cumulative[1:]))
    assert (tmp_path / 'diagnostics.csv').exists()


def test_run_forward_reports_cfl_violations(steep_run_file: Path) -> None:
    config = load_config(steep_run_file)
    with pytest.raises(CFLError) as info:
        api.run_forward(config)
    assert info.value.admissible_dt < info.value.dt == 1.0


@params('base_control', [0.25, 'initial'])
def test_run_gradcheck(tmp_path: Path, small_run: dict, base_control) -> None:
    small_run['gradcheck']['base_control'] = base_control
    config = parse_config(small_run, tmp_path)
    report = api.run_gradcheck(config, tmp_path)

    assert report['passed']
    assert len(report['transpose']) == 2
    assert len(report['gradient']) == len(report['route_agreement']) == 3
    assert report['transpose_max'] <= 1e-10
    assert report['gradient_max'] <= 1e-5
    assert report['route_agreement_max'] <= 1e-10
    assert report['zero_direction']
    assert [t['epsilon'] for t in report['taylor']] == [1e-4, 1e-5]
    assert report['taylor_order'] == pytest.approx(2.0, abs=0.3)
    assert report['multipliers']['lambda_l2'] > 0.0
    assert json.loads((tmp_path / 'gradcheck.json').read_text())['passed']


def test_run_gradcheck_is_reproducible(tmp_path: Path, small_run: dict) -> None:
    config = parse_config(small_run, tmp_path)
    api.run_gradcheck(config, tmp_path / 'a')
    api.run_gradcheck(config, tmp_path / 'b')
    assert (tmp_path / 'a' / 'gradcheck.json').read_bytes() == (tmp_path / 'b' / 'gradcheck.json').read_bytes()


def test_run_gradcheck_fails_on_strict_tolerances(tmp_path: Path, small_run: dict) -> None:
    small_run['gradcheck']['gradient_tol'] = 1e-30
    report = api.run_gradcheck(parse_config(small_run, tmp_path), tmp_path)
    assert not report['passed']


def test_run_optimize(tmp_path: Path, small_run: dict) -> None:
    small_run['output'] = {'dump_fields': True}
    config = parse_config(small_run, tmp_path)
    summary = api.run_optimize(config, tmp_path / 'opt')

    rows = read_rows(tmp_path / 'opt' / 'iterations.csv')
    assert list(rows[0]) == list(ITERATION_COLUMNS)
    assert len(rows) == summary['iterations'] + 1
    costs = [float(row['J']) for row in rows]
    assert all(b <= a for a, b in zip(costs, costs[1:]))
    assert summary['initial_cost'] == costs[0]
    assert summary['cost']['total'] == pytest.approx(costs[-1], rel=1e-12)
    assert summary['reason'] in ('grad_tol', 'max_iters', 'min_step')
    assert summary['converged'] == (summary['reason'] == 'grad_tol')
    assert set(summary['multipliers']) == {'lambda_l2', 'lambda_max', 'eta_l2', 'eta_max'}

    fields = tmp_path / 'opt' / 'fields'
    for prefix in ('u', 'v', 'f', 'lambda', 'eta', 'u_d', 'v_d'):
        assert (fields / f'{prefix}_00000.field').exists()


def test_run_optimize_reads_desired_states_back(tmp_path: Path, small_run: dict) -> None:
    small_run['output'] = {'dump_fields': True}
    small_run['optimize'] = {'max_iters': 0}
    first = api.run_optimize(parse_config(small_run, tmp_path), tmp_path / 'first')

    small_run['cost'] = {'desired': 'file', 'directory': 'first/fields'}
    second = api.run_optimize(parse_config(small_run, tmp_path), tmp_path / 'second')
    assert second['initial_cost'] == first['initial_cost']
    assert second['iterations'] == 0


def test_run_optimize_missing_desired_states(tmp_path: Path, small_run: dict) -> None:
    small_run['cost'] = {'desired': 'file', 'directory': 'nowhere'}
    with pytest.raises(FieldIOError):
        api.run_optimize(parse_config(small_run, tmp_path), tmp_path)


def test_run_optimize_with_fixed_point(tmp_path: Path, small_run: dict) -> None:
    small_run['cost'] = {'f_star': 0.5, 'gamma_f': 1.0}
    small_run['optimize'] = {'method': 'fixed_point', 'max_iters': 50, 'grad_tol': 1e-8}
    summary = api.run_optimize(parse_config(small_run, tmp_path), tmp_path)
    assert summary['method'] == 'fixed_point'
    assert summary['converged']
    assert summary['residual'] <= 1e-8
    assert summary['config']['optimize']['damping'] == 1.0
