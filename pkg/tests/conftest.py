from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

import numpy as np
import pytest

from chemocontrol.core.forward import ControlField, ModelParams, TimeGrid, Trajectory, solve_forward
from chemocontrol.core.grid import Grid, ScalarField, SubdomainMask
from chemocontrol.core.solvers import SolverOptions


@dataclass
class Instance:
    '''A small nonconstant problem with a control away from zero on the mask.'''
    grid: Grid
    time_grid: TimeGrid
    params: ModelParams
    u0: ScalarField
    v0: ScalarField
    mask: SubdomainMask
    f: ControlField
    options: SolverOptions

    def run(self, f: Optional[ControlField] = None, options: Optional[SolverOptions] = None) -> Trajectory:
        return solve_forward(self.u0, self.v0, self.f if f is None else f, self.params,
                             self.time_grid, options or self.options)

    def direction(self, rng: np.random.Generator) -> ControlField:
        return self.f.with_values(rng.standard_normal(self.f.values.shape))

    def state_series(self, rng: np.random.Generator) -> np.ndarray:
        return rng.standard_normal(self.time_grid.series_shape(self.grid))


def build_instance(
    cells: tuple[int, ...] = (8,),
    T: float = 0.1,
    steps: int = 10,
    s: float = 1.0,
    base: float = 0.25,
    half_mask: bool = True
) -> Instance:
    grid = Grid(cells, (1.0,) * len(cells))
    x = grid.centers()
    shape_u = np.prod([np.cos(np.pi * xk) for xk in x], axis=0)
    shape_v = np.prod([np.cos(np.pi * xk + 0.3) for xk in x], axis=0)
    u0 = ScalarField(grid, 1.0 + 0.5 * shape_u)
    v0 = ScalarField(grid, 1.0 + 0.2 * shape_v)
    if half_mask:
        mask = SubdomainMask.from_box(grid, [0.0] * grid.dim, [0.5] + [1.0] * (grid.dim - 1))
    else:
        mask = SubdomainMask.full(grid)
    tg = TimeGrid(T, steps)
    return Instance(
        grid=grid,
        time_grid=tg,
        params=ModelParams(s=s),
        u0=u0,
        v0=v0,
        mask=mask,
        f=ControlField.constant(tg, mask, base),
        options=SolverOptions().tightened())


@pytest.fixture
def instance() -> Callable[..., Instance]:
    return build_instance


def small_run_document() -> dict:
    '''A quick nonconstant 1D run with a control on the left half.'''
    return {
        'grid': {'cells': [16]},
        'time': {'T': 0.05, 'steps': 10},
        'initial': {
            'u0': {'profile': 'cosine', 'value': 1.0, 'amplitude': 0.5},
            'v0': {'profile': 'cosine', 'value': 1.0, 'amplitude': 0.3},
        },
        'control': {'mask_lower': [0.0], 'mask_upper': [0.5], 'initial': 'constant', 'value': 0.25},
        'cost': {'f_star': 0.5},
        'optimize': {'max_iters': 5},
        'gradcheck': {'directions': 3, 'transpose_samples': 2},
    }


SMALL_RUN_TOML = '''\
[grid]
cells = [16]

[time]
T = 0.05
steps = 10

[initial.u0]
profile = "cosine"
value = 1.0
amplitude = 0.5

[initial.v0]
profile = "cosine"
value = 1.0
amplitude = 0.3

[control]
mask_lower = [0.0]
mask_upper = [0.5]
initial = "constant"
value = 0.25

[cost]
f_star = 0.5

[optimize]
max_iters = 5

[gradcheck]
directions = 3
transpose_samples = 2
'''

STEEP_RUN_TOML = '''\
[grid]
cells = [32]

[time]
T = 1.0
steps = 1

[initial.v0]
profile = "bump"
value = 0.0
amplitude = 5.0
center = [0.25]
width = 0.05
'''


@pytest.fixture
def small_run() -> dict:
    return small_run_document()


@pytest.fixture
def small_run_file(tmp_path: Path) -> Path:
    path = tmp_path / 'small.toml'
    path.write_text(SMALL_RUN_TOML)
    return path


@pytest.fixture
def steep_run_file(tmp_path: Path) -> Path:
    path = tmp_path / 'steep.toml'
    path.write_text(STEEP_RUN_TOML)
    return path
