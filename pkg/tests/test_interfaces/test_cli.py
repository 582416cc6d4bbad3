# pylint: disable=missing-function-docstring,missing-module-docstring,redefined-outer-name
import json
import logging
from pathlib import Path

import pytest

from chemocontrol.api import cli
from chemocontrol.core.constants import COMMANDS
from chemocontrol.core.logging_config import logger

params = pytest.mark.parametrize


@pytest.fixture(autouse=True)
def detach_log_handler():
    yield
    for handler in [h for h in logger.handlers if isinstance(h, logging.StreamHandler)]:
        logger.removeHandler(handler)
    logger.setLevel(logging.NOTSET)


def error_line(capsys: pytest.CaptureFixture) -> str:
    lines = [line for line in capsys.readouterr().err.splitlines() if line.startswith('error ')]
    assert len(lines) == 1
    return lines[0]


@params('command, report', [
    ('forward', 'summary.json'),
    ('diagnose', 'energy.csv'),
    ('gradcheck', 'gradcheck.json'),
])
def test_commands_succeed(small_run_file: Path, tmp_path: Path, command: str, report: str) -> None:
    out = tmp_path / command
    assert cli.main([command, str(small_run_file), '--output', str(out)]) == 0
    assert (out / report).exists()


def test_optimize_exit_status_follows_convergence(small_run_file: Path, tmp_path: Path) -> None:
    status = cli.main(['optimize', str(small_run_file), '-o', str(tmp_path / 'opt')])
    summary = json.loads((tmp_path / 'opt' / 'summary.json').read_text())
    assert status == (0 if summary['converged'] else 1)


def test_default_output_directory(small_run_file: Path) -> None:
    assert cli.main(['forward', str(small_run_file)]) == 0
    assert (small_run_file.parent / 'output' / 'diagnostics.csv').exists()


@params('command', ['forward', 'diagnose', 'gradcheck', 'optimize'])
def test_runs_are_byte_identical(small_run_file: Path, tmp_path: Path, command: str) -> None:
    small_run_file.write_text(small_run_file.read_text() + '\n[output]\ndump_fields = true\n')
    for name in ('a', 'b'):
        cli.main([command, str(small_run_file), '-o', str(tmp_path / name)])
    first = sorted(p.relative_to(tmp_path / 'a') for p in (tmp_path / 'a').rglob('*') if p.is_file())
    second = sorted(p.relative_to(tmp_path / 'b') for p in (tmp_path / 'b').rglob('*') if p.is_file())
    assert first == second
    assert Path('summary.json') in first or Path('gradcheck.json') in first
    if command != 'gradcheck':
        assert any(p.parts[0] == 'fields' for p in first)
    for report in first:
        assert (tmp_path / 'a' / report).read_bytes() == (tmp_path / 'b' / report).read_bytes()


def test_config_errors(tmp_path: Path, capsys: pytest.CaptureFixture) -> None:
    path = tmp_path / 'bad.toml'
    path.write_text('[grid]\ncells = [8]\n[time]\nT = 0.1\nsteps = 10\n[model]\nbeta = 1.0\n')
    assert cli.main(['forward', str(path)]) == 2
    line = error_line(capsys)
    assert line.startswith('error category=config message=')
    assert 'model.beta' in line


def test_cfl_errors(steep_run_file: Path, capsys: pytest.CaptureFixture) -> None:
    assert cli.main(['forward', str(steep_run_file)]) == 3
    assert error_line(capsys).startswith('error category=cfl message=')


def test_io_errors(small_run_file: Path, tmp_path: Path, capsys: pytest.CaptureFixture) -> None:
    assert cli.main(['forward', str(tmp_path / 'absent.toml')]) == 5
    assert error_line(capsys).startswith('error category=io message=')

    text = small_run_file.read_text().replace('f_star = 0.5', 'desired = "file"\ndirectory = "nowhere"')
    small_run_file.write_text(text)
    assert cli.main(['optimize', str(small_run_file)]) == 5
    assert error_line(capsys).startswith('error category=io message=')


def test_parser() -> None:
    parser = cli.build_parser()
    args = parser.parse_args(['gradcheck', 'run.toml', '-v'])
    assert args.command == 'gradcheck'
    assert args.config == Path('run.toml')
    assert args.output is None
    assert args.verbose
    with pytest.raises(SystemExit):
        parser.parse_args(['simulate', 'run.toml'])
    assert set(COMMANDS) == set(cli.COMMAND_TABLE)
