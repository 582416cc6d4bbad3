'''
Run configuration files.

A configuration is a TOML document with the tables ``[grid]``, ``[time]``,
``[model]``, ``[solver]``, ``[initial.u0]``, ``[initial.v0]``,
``[control]``, ``[cost]``, ``[optimize]``, ``[gradcheck]`` and
``[output]``. Only ``grid.cells``, ``time.T`` and ``time.steps`` are
required; every other key has a default. Unknown tables and keys are
rejected. The grammar is documented in ``README.md``.

Parsing produces a ``RunConfig`` whose ``resolved`` attribute is the
document with every default materialized; run summaries embed it.
'''

import math

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterator, Mapping, Optional

import numpy as np

from chemocontrol.core.constants import (
    BOX,
    BUMP,
    CONSTANT,
    CONTROL_PREFIX,
    COSINE,
    DEFAULT_ALPHA,
    DEFAULT_ARMIJO_C,
    DEFAULT_BACKTRACK_FACTOR,
    DEFAULT_BASE_CONTROL,
    DEFAULT_CG_RTOL,
    DEFAULT_DAMPING,
    DEFAULT_DIRECTIONS,
    DEFAULT_GAMMA_F,
    DEFAULT_GAMMA_U,
    DEFAULT_GAMMA_V,
    DEFAULT_GRAD_TOL,
    DEFAULT_INITIAL_STEP,
    DEFAULT_LINEAR_RTOL,
    DEFAULT_MAX_ITERS,
    DEFAULT_MAXITER_FACTOR,
    DEFAULT_MIN_STEP,
    DEFAULT_OUTPUT_DIR,
    DEFAULT_Q,
    DEFAULT_S,
    DEFAULT_SEED,
    DEFAULT_TRANSPOSE_SAMPLES,
    DESIRED_U_PREFIX,
    DESIRED_V_PREFIX,
    FD_EPSILON,
    FILE,
    FIXED_POINT,
    GENERATE,
    GRADIENT,
    GRADIENT_TOLERANCE,
    INITIAL,
    OPTIMIZE_METHODS,
    ROUTE_TOLERANCE,
    TRANSPOSE_TOLERANCE,
    UNCONSTRAINED,
    ZERO
)
from chemocontrol.core.cost import ControlConstraints
from chemocontrol.core.errors import ArgumentError, ConfigError, FieldIOError
from chemocontrol.core.field_io import read_field, read_series
from chemocontrol.core.forward import ControlField, ModelParams, TimeGrid
from chemocontrol.core.grid import Grid, ScalarField, SubdomainMask
from chemocontrol.core.optimize import OptimizeOptions
from chemocontrol.core.solvers import SolverOptions
from chemocontrol.core.validation import require_nonnegative

__all__ = [
    'CostSettings',
    'GradcheckSettings',
    'RunConfig',
    'load_config',
    'parse_config'
]

_REQUIRED = object()

SECTIONS: dict[str, dict[str, Any]] = {
    'grid': {'cells': _REQUIRED, 'extent': None},
    'time': {'T': _REQUIRED, 'steps': _REQUIRED},
    'model': {'s': DEFAULT_S, 'alpha': DEFAULT_ALPHA, 'q': DEFAULT_Q},
    'solver': {
        'rtol': DEFAULT_CG_RTOL,
        'linear_rtol': DEFAULT_LINEAR_RTOL,
        'maxiter_factor': DEFAULT_MAXITER_FACTOR,
    },
    'control': {
        'mask_lower': None,
        'mask_upper': None,
        'constraint': UNCONSTRAINED,
        'lower': None,
        'upper': None,
        'initial': ZERO,
        'value': 0.0,
        'directory': None,
        'prefix': CONTROL_PREFIX,
    },
    'cost': {
        'gamma_u': DEFAULT_GAMMA_U,
        'gamma_v': DEFAULT_GAMMA_V,
        'gamma_f': DEFAULT_GAMMA_F,
        'desired': GENERATE,
        'f_star': 0.0,
        'directory': None,
        'u_prefix': DESIRED_U_PREFIX,
        'v_prefix': DESIRED_V_PREFIX,
    },
    'optimize': {
        'max_iters': DEFAULT_MAX_ITERS,
        'armijo_c': DEFAULT_ARMIJO_C,
        'backtrack_factor': DEFAULT_BACKTRACK_FACTOR,
        'initial_step': DEFAULT_INITIAL_STEP,
        'grad_tol': DEFAULT_GRAD_TOL,
        'min_step': DEFAULT_MIN_STEP,
        'bb_steps': True,
        'method': GRADIENT,
        'damping': DEFAULT_DAMPING,
    },
    'gradcheck': {
        'seed': DEFAULT_SEED,
        'directions': DEFAULT_DIRECTIONS,
        'transpose_samples': DEFAULT_TRANSPOSE_SAMPLES,
        'epsilon': FD_EPSILON,
        'base_control': DEFAULT_BASE_CONTROL,
        'transpose_tol': TRANSPOSE_TOLERANCE,
        'gradient_tol': GRADIENT_TOLERANCE,
        'route_tol': ROUTE_TOLERANCE,
    },
    'output': {'directory': DEFAULT_OUTPUT_DIR, 'dump_fields': False},
}

PROFILES: dict[str, dict[str, Any]] = {
    ZERO: {},
    CONSTANT: {'value': 1.0},
    COSINE: {'value': 1.0, 'amplitude': 0.5, 'mode': 1},
    BUMP: {'value': 0.0, 'amplitude': 1.0, 'center': None, 'width': 0.1},
    FILE: {'path': _REQUIRED},
}
DEFAULT_PROFILE = {'profile': CONSTANT, 'value': 1.0}


@dataclass(frozen=True)
class CostSettings:
    '''Cost weights and the source of the desired states.'''
    gamma_u: float
    gamma_v: float
    gamma_f: float
    desired: str
    f_star: float
    directory: Optional[Path]
    u_prefix: str
    v_prefix: str


@dataclass(frozen=True)
class GradcheckSettings:
    '''
    ``base_control`` is either a constant control value on the mask or
    ``'initial'`` for the configured initial control.
    '''
    seed: int
    directions: int
    transpose_samples: int
    epsilon: float
    base_control: float | str
    transpose_tol: float
    gradient_tol: float
    route_tol: float


@dataclass(frozen=True, eq=False)
class RunConfig:
    grid: Grid
    time_grid: TimeGrid
    params: ModelParams
    solver: SolverOptions
    u0: ScalarField
    v0: ScalarField
    mask: SubdomainMask
    constraints: ControlConstraints
    f0: ControlField
    cost: CostSettings
    optimize: OptimizeOptions
    gradcheck: GradcheckSettings
    output_dir: Path
    dump_fields: bool
    resolved: dict[str, Any]


#####################
# Value conversions #
#####################

@contextmanager
def _entry(key: str) -> Iterator[None]:
    '''Report type-invariant violations as configuration errors of ``key``.'''
    try:
        yield
    except ConfigError:
        raise
    except ArgumentError as exc:
        raise ConfigError(key, str(exc)) from exc


def _merge(section: str, given: Any, defaults: Mapping[str, Any]) -> dict[str, Any]:
    if not isinstance(given, dict):
        raise ConfigError(section, "expected a table")
    for key in given:
        if key not in defaults:
            raise ConfigError(f"{section}.{key}", "unknown key")
    merged: dict[str, Any] = {}
    for key, default in defaults.items():
        if key in given:
            merged[key] = given[key]
        elif default is _REQUIRED:
            raise ConfigError(f"{section}.{key}", "missing required key")
        else:
            merged[key] = default
    return merged


def _real(key: str, value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(key, f"expected a number, got {value!r}")
    return float(value)


def _integer(key: str, value: Any) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(key, f"expected an integer, got {value!r}")
    return value


def _flag(key: str, value: Any) -> bool:
    if not isinstance(value, bool):
        raise ConfigError(key, f"expected true or false, got {value!r}")
    return value


def _text(key: str, value: Any) -> str:
    if not isinstance(value, str):
        raise ConfigError(key, f"expected a string, got {value!r}")
    return value


def _choice(key: str, value: Any, choices: tuple[str, ...]) -> str:
    value = _text(key, value)
    if value not in choices:
        raise ConfigError(key, f"expected one of {', '.join(choices)}, got {value!r}")
    return value


def _reals(key: str, value: Any, length: Optional[int] = None) -> list[float]:
    if not isinstance(value, list):
        raise ConfigError(key, f"expected an array, got {value!r}")
    if length is not None and len(value) != length:
        raise ConfigError(key, f"expected {length} entries, got {len(value)}")
    return [_real(key, x) for x in value]


def _path(base_dir: Path, key: str, value: Any) -> Path:
    path = Path(_text(key, value))
    return path if path.is_absolute() else base_dir / path


############
# Sections #
############

def _grid(table: dict[str, Any]) -> Grid:
    if not isinstance(table['cells'], list):
        raise ConfigError('grid.cells', "expected an array of cell counts")
    cells = [_integer('grid.cells', n) for n in table['cells']]
    if table['extent'] is None:
        table['extent'] = [1.0] * len(cells)
    extent = _reals('grid.extent', table['extent'], len(cells))
    with _entry('grid'):
        return Grid(tuple(cells), tuple(extent))


def _profile(key: str, given: Any, grid: Grid, base_dir: Path) -> tuple[ScalarField, dict[str, Any]]:
    given = DEFAULT_PROFILE if given is None else given
    if not isinstance(given, dict):
        raise ConfigError(key, "expected a table")
    kind = _choice(f"{key}.profile", given.get('profile', CONSTANT), tuple(PROFILES))
    table = _merge(key, {k: v for k, v in given.items() if k != 'profile'}, PROFILES[kind])
    x = grid.centers()

    with _entry(key):
        if kind == ZERO:
            values = grid.zeros()
        elif kind == CONSTANT:
            values = np.full(grid.cells, _real(f"{key}.value", table['value']))
        elif kind == COSINE:
            mode = _integer(f"{key}.mode", table['mode'])
            shape = math.prod(np.cos(mode * np.pi * xk / L) for xk, L in zip(x, grid.extent))
            values = (_real(f"{key}.value", table['value'])
                      + _real(f"{key}.amplitude", table['amplitude']) * shape)
        elif kind == BUMP:
            if table['center'] is None:
                table['center'] = [0.5 * L for L in grid.extent]
            center = _reals(f"{key}.center", table['center'], grid.dim)
            width = _real(f"{key}.width", table['width'])
            if width <= 0.0:
                raise ConfigError(f"{key}.width", "must be positive")
            distance = sum((xk - c) ** 2 for xk, c in zip(x, center))
            values = (_real(f"{key}.value", table['value'])
                      + _real(f"{key}.amplitude", table['amplitude']) * np.exp(-distance / (2.0 * width ** 2)))
        else:
            values = read_field(_path(base_dir, f"{key}.path", table['path']), grid)[0].values
        require_nonnegative(key, values)
        field = ScalarField(grid, values)
    return field, {'profile': kind, **table}


def _control(table: dict[str, Any], grid: Grid, time_grid: TimeGrid,
             base_dir: Path) -> tuple[SubdomainMask, ControlConstraints, ControlField]:
    if table['mask_lower'] is None:
        table['mask_lower'] = [0.0] * grid.dim
    if table['mask_upper'] is None:
        table['mask_upper'] = list(grid.extent)
    lower = _reals('control.mask_lower', table['mask_lower'], grid.dim)
    upper = _reals('control.mask_upper', table['mask_upper'], grid.dim)
    with _entry('control.mask_lower'):
        mask = SubdomainMask.from_box(grid, lower, upper)

    kind = _choice('control.constraint', table['constraint'], (UNCONSTRAINED, BOX))
    with _entry('control.constraint'):
        if kind == BOX:
            if table['lower'] is None or table['upper'] is None:
                raise ConfigError('control.constraint', "box constraints need 'lower' and 'upper'")
            constraints = ControlConstraints.box(
                _real('control.lower', table['lower']), _real('control.upper', table['upper']))
        else:
            if table['lower'] is not None or table['upper'] is not None:
                raise ConfigError('control.constraint', "bounds given without box constraints")
            constraints = ControlConstraints()

    initial = _choice('control.initial', table['initial'], (ZERO, CONSTANT, FILE))
    with _entry('control.initial'):
        if initial == ZERO:
            f0 = ControlField.zeros(time_grid, mask)
        elif initial == CONSTANT:
            f0 = ControlField.constant(time_grid, mask, _real('control.value', table['value']))
        else:
            if table['directory'] is None:
                raise ConfigError('control.directory', "required for a file control")
            directory = _path(base_dir, 'control.directory', table['directory'])
            prefix = _text('control.prefix', table['prefix'])
            f0 = ControlField(time_grid, mask, read_series(directory, prefix, grid, time_grid.nodes))
    return mask, constraints, f0


def _cost(table: dict[str, Any], base_dir: Path) -> CostSettings:
    desired = _choice('cost.desired', table['desired'], (GENERATE, FILE))
    directory = None
    if desired == FILE:
        if table['directory'] is None:
            raise ConfigError('cost.directory', "required for desired states from files")
        directory = _path(base_dir, 'cost.directory', table['directory'])
    return CostSettings(
        gamma_u=_real('cost.gamma_u', table['gamma_u']),
        gamma_v=_real('cost.gamma_v', table['gamma_v']),
        gamma_f=_real('cost.gamma_f', table['gamma_f']),
        desired=desired,
        f_star=_real('cost.f_star', table['f_star']),
        directory=directory,
        u_prefix=_text('cost.u_prefix', table['u_prefix']),
        v_prefix=_text('cost.v_prefix', table['v_prefix']))


def _gradcheck(table: dict[str, Any]) -> GradcheckSettings:
    base = table['base_control']
    if isinstance(base, str):
        base = _choice('gradcheck.base_control', base, (INITIAL,))
    else:
        base = _real('gradcheck.base_control', base)
    settings = GradcheckSettings(
        seed=_integer('gradcheck.seed', table['seed']),
        directions=_integer('gradcheck.directions', table['directions']),
        transpose_samples=_integer('gradcheck.transpose_samples', table['transpose_samples']),
        epsilon=_real('gradcheck.epsilon', table['epsilon']),
        base_control=base,
        transpose_tol=_real('gradcheck.transpose_tol', table['transpose_tol']),
        gradient_tol=_real('gradcheck.gradient_tol', table['gradient_tol']),
        route_tol=_real('gradcheck.route_tol', table['route_tol']))
    if settings.directions < 1 or settings.transpose_samples < 1:
        raise ConfigError('gradcheck', "at least one direction and one transpose sample are required")
    if settings.epsilon <= 0.0:
        raise ConfigError('gradcheck.epsilon', "must be positive")
    return settings


def parse_config(document: Mapping[str, Any], base_dir: Path | str = '.') -> RunConfig:
    '''
    Resolve a parsed TOML document into a run.

    Parameters
    ----------
    document : Mapping[str, Any]
        The parsed document.
    base_dir : Path | str
        Directory against which relative file paths are resolved.

    Returns
    -------
    RunConfig
        Validated library objects and the resolved document.

    Raises
    ------
    ConfigError
        If a table or key is unknown or missing, or a value is invalid.
    FieldIOError
        If a referenced field dump cannot be read.
    '''
    base_dir = Path(base_dir)
    for name in document:
        if name not in SECTIONS and name != 'initial':
            raise ConfigError(name, "unknown table")
    tables = {name: _merge(name, document.get(name, {}), defaults)
              for name, defaults in SECTIONS.items()}

    grid = _grid(tables['grid'])
    time = tables['time']
    with _entry('time'):
        time_grid = TimeGrid(_real('time.T', time['T']), _integer('time.steps', time['steps']))
    model = tables['model']
    with _entry('model'):
        params = ModelParams(
            s=_real('model.s', model['s']),
            alpha=_real('model.alpha', model['alpha']),
            q=_real('model.q', model['q']))
    solver_table = tables['solver']
    with _entry('solver'):
        solver = SolverOptions(
            rtol=_real('solver.rtol', solver_table['rtol']),
            linear_rtol=_real('solver.linear_rtol', solver_table['linear_rtol']),
            maxiter_factor=_integer('solver.maxiter_factor', solver_table['maxiter_factor']))

    initial = document.get('initial', {})
    if not isinstance(initial, dict):
        raise ConfigError('initial', "expected a table")
    for name in initial:
        if name not in ('u0', 'v0'):
            raise ConfigError(f"initial.{name}", "unknown key")
    u0, u0_table = _profile('initial.u0', initial.get('u0'), grid, base_dir)
    v0, v0_table = _profile('initial.v0', initial.get('v0'), grid, base_dir)

    mask, constraints, f0 = _control(tables['control'], grid, time_grid, base_dir)
    cost = _cost(tables['cost'], base_dir)

    opt = tables['optimize']
    with _entry('optimize'):
        optimize = OptimizeOptions(
            max_iters=_integer('optimize.max_iters', opt['max_iters']),
            armijo_c=_real('optimize.armijo_c', opt['armijo_c']),
            backtrack_factor=_real('optimize.backtrack_factor', opt['backtrack_factor']),
            initial_step=_real('optimize.initial_step', opt['initial_step']),
            grad_tol=_real('optimize.grad_tol', opt['grad_tol']),
            min_step=_real('optimize.min_step', opt['min_step']),
            bb_steps=_flag('optimize.bb_steps', opt['bb_steps']),
            method=_choice('optimize.method', opt['method'], OPTIMIZE_METHODS),
            damping=_real('optimize.damping', opt['damping']))
    if optimize.method == FIXED_POINT and cost.gamma_f == 0.0:
        raise ConfigError('optimize.method', "the fixed-point update needs cost.gamma_f > 0")
    gradcheck = _gradcheck(tables['gradcheck'])

    output = tables['output']
    output_dir = _path(base_dir, 'output.directory', output['directory'])
    dump_fields = _flag('output.dump_fields', output['dump_fields'])

    resolved = {name: dict(table) for name, table in tables.items()}
    resolved['initial'] = {'u0': u0_table, 'v0': v0_table}
    return RunConfig(
        grid=grid,
        time_grid=time_grid,
        params=params,
        solver=solver,
        u0=u0,
        v0=v0,
        mask=mask,
        constraints=constraints,
        f0=f0,
        cost=cost,
        optimize=optimize,
        gradcheck=gradcheck,
        output_dir=output_dir,
        dump_fields=dump_fields,
        resolved=resolved)


def load_config(path: Path | str) -> RunConfig:
    '''
    Read and resolve a TOML configuration file. Relative paths inside the
    file are taken relative to its directory.

    Raises
    ------
    FieldIOError
        If the file cannot be read.
    ConfigError
        If the file is not valid TOML or does not describe a run.
    '''
    path = Path(path)
    try:
        with path.open('rb') as stream:
            document = tomllib.load(stream)
    except OSError as exc:
        raise FieldIOError(f"Cannot read configuration '{path}': {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(str(path), f"malformed TOML: {exc}") from exc
    return parse_config(document, path.parent)
