'''
Command-line front door.

    chemocontrol {forward,gradcheck,optimize,diagnose} CONFIG [--output DIR] [--verbose]

Exit status is 0 on success and 1 when the derivative checks fail or the
optimizer stops without converging. Errors print a single line

    error category=<config|cfl|solver|io> message=<text>

to stderr and exit with the category's code (2, 3, 4 or 5).
'''

import argparse
import logging
import sys
from pathlib import Path
from typing import Callable, Optional, Sequence

from chemocontrol.api.config import RunConfig, load_config
from chemocontrol.api.endpoints import (
    run_diagnose,
    run_forward,
    run_gradcheck,
    run_optimize
)
from chemocontrol.core.constants import (
    COMMANDS,
    DIAGNOSE,
    EXIT_CODES,
    FORWARD,
    GRADCHECK,
    OPTIMIZE
)
from chemocontrol.core.errors import ChemocontrolError
from chemocontrol.core.logging_config import configure_logging, logger

__all__ = [
    'main',
    'cmd_forward',
    'cmd_gradcheck',
    'cmd_optimize',
    'cmd_diagnose'
]

EXIT_SUCCESS = 0
EXIT_FAILURE = 1


def _report_error(exc: ChemocontrolError) -> int:
    message = ' '.join(str(exc).split())
    notes = getattr(exc, '__notes__', [])
    if notes:
        message += ' (' + '; '.join(notes) + ')'
    print(f"error category={exc.category} message={message}", file=sys.stderr)
    logger.debug("command failed", exc_info=exc)
    return EXIT_CODES[exc.category]


def _run(config_path: Path | str, output_dir: Optional[Path | str],
         action: Callable[[RunConfig, Optional[Path | str]], bool]) -> int:
    try:
        config = load_config(config_path)
        ok = action(config, output_dir)
    except ChemocontrolError as exc:
        return _report_error(exc)
    return EXIT_SUCCESS if ok else EXIT_FAILURE


def cmd_forward(config_path: Path | str, output_dir: Optional[Path | str] = None) -> int:
    '''Forward run with diagnostics; 0 on success.'''
    return _run(config_path, output_dir, lambda c, o: bool(run_forward(c, o)))


def cmd_diagnose(config_path: Path | str, output_dir: Optional[Path | str] = None) -> int:
    '''Forward run with the energy-inequality ingredients; 0 on success.'''
    return _run(config_path, output_dir, lambda c, o: bool(run_diagnose(c, o)))


def cmd_gradcheck(config_path: Path | str, output_dir: Optional[Path | str] = None) -> int:
    '''Derivative checks; 0 iff every check passes.'''
    return _run(config_path, output_dir, lambda c, o: run_gradcheck(c, o)['passed'])


def cmd_optimize(config_path: Path | str, output_dir: Optional[Path | str] = None) -> int:
    '''Projected gradient descent; 0 iff converged.'''
    return _run(config_path, output_dir, lambda c, o: run_optimize(c, o)['converged'])


COMMAND_TABLE = {
    FORWARD: cmd_forward,
    GRADCHECK: cmd_gradcheck,
    OPTIMIZE: cmd_optimize,
    DIAGNOSE: cmd_diagnose,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='chemocontrol',
        description="Forward runs, derivative checks and optimal control of a "
                    "chemotaxis-consumption system on a box.")
    parser.add_argument('command', choices=COMMANDS, help="the experiment to run")
    parser.add_argument('config', type=Path, help="TOML run configuration")
    parser.add_argument(
        '--output', '-o', type=Path, default=None,
        help="output directory (overrides output.directory of the configuration)")
    parser.add_argument('--verbose', '-v', action='store_true', help="log at DEBUG level")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(logging.DEBUG if args.verbose else logging.INFO)
    return COMMAND_TABLE[args.command](args.config, args.output)


if __name__ == '__main__':
    raise SystemExit(main())
