import math

import numpy as np
import pytest

from chemocontrol.core import forward
from chemocontrol.core.errors import ArgumentError, CFLError
from chemocontrol.core.forward import ControlField, ModelParams, TimeGrid
from chemocontrol.core.grid import Grid, ScalarField, SubdomainMask, integrate, laplacian_matrix
from chemocontrol.core.solvers import SolverOptions

params = pytest.mark.parametrize


def constant_run(n: int, T: float, steps: int, u0: float = 2.0, v0: float = 1.0) -> forward.Trajectory:
    grid = Grid((n,), (1.0,))
    tg = TimeGrid(T, steps)
    f = ControlField.zeros(tg, SubdomainMask.full(grid))
    return forward.solve_forward(ScalarField.constant(grid, u0), ScalarField.constant(grid, v0),
                                 f, ModelParams(), tg)


@params(
    'kwargs', [
        {'s': 0.5},
        {'alpha': 0.0},
        {'q': 2.5},
        {'q': math.nan},
    ]
)
def test_model_params_reject(kwargs: dict) -> None:
    with pytest.raises(ArgumentError):
        ModelParams(**kwargs)


def test_model_params_warn_near_critical_q(caplog: pytest.LogCaptureFixture) -> None:
    with caplog.at_level('WARNING', logger='chemocontrol'):
        ModelParams(q=2.51)
    assert 'critical exponent' in caplog.text


@params('T, steps', [(1.0, 10), (0.5, 500), (0.3, 7)])
def test_time_grid(T: float, steps: int) -> None:
    tg = TimeGrid(T, steps)
    assert tg.dt * tg.steps == pytest.approx(T, rel=1e-15)
    assert tg.nodes == steps + 1
    assert tg.times[-1] == pytest.approx(T)


@params('steps', [0, -3, 2.5, True])
def test_time_grid_rejects(steps) -> None:
    with pytest.raises(ArgumentError):
        TimeGrid(1.0, steps)


def test_control_field_is_zero_off_mask() -> None:
    grid = Grid((4,), (1.0,))
    mask = SubdomainMask.from_box(grid, [0.0], [0.5])
    f = ControlField(TimeGrid(1.0, 2), mask, np.full((3, 4), 7.0))
    assert f.values[:, 2:].tolist() == [[0.0, 0.0]] * 3
    assert np.all(f.values[:, :2] == 7.0)
    assert not f.values.flags.writeable


def test_trajectory_rejects_negative_states() -> None:
    grid = Grid((2,), (1.0,))
    tg = TimeGrid(1.0, 1)
    with pytest.raises(ArgumentError):
        forward.Trajectory(grid, tg, np.array([[1.0, 1.0], [1.0, -0.1]]), np.ones((2, 2)))


def test_step_forward_constant_data() -> None:
    grid = Grid((5,), (1.0,))
    u, v = ScalarField.constant(grid, 2.0), ScalarField.constant(grid, 1.0)
    u_next, v_next = forward.step_forward(u, v, ScalarField.constant(grid, 0.0), ModelParams(), 0.01)
    assert u_next.values == pytest.approx(np.full(5, 2.0), abs=1e-12)
    assert v_next.values == pytest.approx(np.full(5, 1.0 / 1.02), abs=1e-12)


def test_step_forward_without_cells_is_a_heat_step() -> None:
    grid = Grid((6,), (1.0,))
    x, = grid.centers()
    v = ScalarField(grid, 1.0 + np.cos(np.pi * x))
    u_next, v_next = forward.step_forward(ScalarField.constant(grid, 0.0), v,
                                          ScalarField.constant(grid, 0.0), ModelParams(), 0.01)
    assert not np.any(u_next.values)
    residual = v_next.values - 0.01 * laplacian_matrix(grid).dot(v_next.values) - v.values
    assert np.abs(residual).max() <= 1e-9


def test_step_forward_conserves_mass(instance) -> None:
    inst = instance(cells=(6, 5))
    u_next, _ = forward.step_forward(inst.u0, inst.v0, inst.f.at(0), inst.params, inst.time_grid.dt)
    assert integrate(u_next) == pytest.approx(integrate(inst.u0), rel=1e-8)


def test_step_forward_rejects_large_step() -> None:
    grid = Grid((10,), (1.0,))
    x, = grid.centers()
    v = ScalarField(grid, 5.0 * x)
    with pytest.raises(CFLError) as info:
        forward.step_forward(ScalarField.constant(grid, 1.0), v, ScalarField.constant(grid, 0.0),
                             ModelParams(), 0.5)
    assert info.value.category == 'cfl'
    assert info.value.admissible_dt < 0.5


def test_cfl_dt() -> None:
    grid = Grid((10,), (1.0,))
    x, = grid.centers()
    u = ScalarField.constant(grid, 1.0)
    assert forward.cfl_dt(u, ScalarField(grid, 5.0 * x), ModelParams()) == pytest.approx(0.01)
    assert forward.cfl_dt(u, ScalarField(grid, 10.0 * x), ModelParams()) == pytest.approx(0.005)
    assert forward.cfl_dt(u, ScalarField.constant(grid, 3.0), ModelParams()) > 1e25


def peaked_density() -> tuple[ScalarField, ScalarField, ScalarField]:
    grid = Grid((32,), (1.0,))
    x, = grid.centers()
    u = ScalarField(grid, 1.0 + 50.0 * np.exp(-(x - 0.5) ** 2 / (2.0 * 0.05 ** 2)))
    return u, ScalarField.constant(grid, 1.0), ScalarField.constant(grid, 0.0)


def test_step_bound_follows_the_updated_chemical() -> None:
    # A flat v has no gradient, but the step consumes it under the peak of u.
    u, v, f = peaked_density()
    assert forward.cfl_dt(u, v, ModelParams()) > 1e25
    bound = forward.step_admissible_dt(u, v, f, ModelParams(), 0.05)
    assert bound < 0.05
    with pytest.raises(CFLError) as info:
        forward.step_forward(u, v, f, ModelParams(), 0.05)
    assert info.value.dt == 0.05
    assert info.value.admissible_dt == pytest.approx(bound, rel=1e-12)


def test_step_within_the_step_bound_succeeds() -> None:
    u, v, f = peaked_density()
    dt = 1e-3
    assert forward.step_admissible_dt(u, v, f, ModelParams(), dt) >= dt
    u_next, v_next = forward.step_forward(u, v, f, ModelParams(), dt)
    assert u_next.values.min() >= -1e-12
    assert v_next.values.max() <= 1.0 + 1e-12
    assert integrate(u_next) == pytest.approx(integrate(u), rel=1e-8)


def test_constant_data_ode_oracle() -> None:
    traj = constant_run(16, 0.5, 500)
    v_final = traj.v[-1]
    assert np.abs(v_final - math.exp(-1.0)).max() / math.exp(-1.0) <= 1e-3
    assert np.ptp(traj.u[-1]) <= 1e-12
    assert np.ptp(v_final) <= 1e-12


def test_constant_data_first_order_convergence() -> None:
    errors = [abs(constant_run(4, 0.5, steps).v[-1, 0] - math.exp(-1.0)) for steps in (250, 500, 1000, 2000)]
    for coarse, fine in zip(errors, errors[1:]):
        assert 1.7 <= coarse / fine <= 2.3


def test_zero_chemical_stays_zero() -> None:
    grid = Grid((8,), (1.0,))
    x, = grid.centers()
    tg = TimeGrid(0.2, 20)
    traj = forward.solve_forward(ScalarField(grid, 1.0 + x), ScalarField.constant(grid, 0.0),
                                 ControlField.zeros(tg, SubdomainMask.full(grid)), ModelParams(), tg)
    assert not np.any(traj.v)


def test_zero_cells_stay_zero(instance) -> None:
    inst = instance()
    traj = forward.solve_forward(ScalarField.constant(inst.grid, 0.0), inst.v0, inst.f,
                                 inst.params, inst.time_grid)
    assert not np.any(traj.u)


@params('cells, steps', [((16,), 200), ((8, 8), 200)])
def test_mass_conservation(instance, cells: tuple[int, ...], steps: int) -> None:
    inst = instance(cells=cells, T=0.2, steps=steps)
    traj = inst.run(options=SolverOptions())
    masses = np.array([integrate(u) for u in traj.u_series])
    assert np.abs(masses - masses[0]).max() <= 1e-8 * masses[0]


@params('base', [-0.5, 0.0, 0.5])
def test_nonnegativity(instance, base: float) -> None:
    inst = instance(cells=(12,), T=0.2, steps=40, base=base)
    traj = inst.run()
    assert traj.u.min() >= -1e-12
    assert traj.v.min() >= -1e-12


@params('base', [0.0, -1.0])
def test_maximum_principle_without_source(instance, base: float) -> None:
    inst = instance(cells=(6, 6), T=0.2, steps=20, base=base)
    traj = inst.run()
    peaks = traj.v.reshape(traj.v.shape[0], -1).max(axis=1)
    assert np.all(np.diff(peaks) <= 1e-10)


def test_constant_state_stays_constant() -> None:
    grid = Grid((4, 3), (1.0, 2.0))
    tg = TimeGrid(0.1, 10)
    f = ControlField.constant(tg, SubdomainMask.full(grid), 0.3)
    traj = forward.solve_forward(ScalarField.constant(grid, 1.5), ScalarField.constant(grid, 0.8),
                                 f, ModelParams(s=2.0), tg)
    for n in range(tg.nodes):
        assert np.ptp(traj.u[n]) <= 1e-12
        assert np.ptp(traj.v[n]) <= 1e-12


def test_solve_forward_rejects_misaligned_control(instance) -> None:
    inst = instance()
    other = ControlField.zeros(TimeGrid(0.1, 11), inst.mask)
    with pytest.raises(ArgumentError):
        forward.solve_forward(inst.u0, inst.v0, other, inst.params, inst.time_grid)


def test_inner_products_use_their_nodes() -> None:
    grid = Grid((2,), (1.0,))
    tg = TimeGrid(1.0, 4)
    a = np.ones(tg.series_shape(grid))
    a[0] = 100.0
    b = np.ones(tg.series_shape(grid))
    b[-1] = 100.0
    assert forward.state_inner(grid, tg, a, np.ones_like(a)) == pytest.approx(1.0)
    assert forward.control_inner(grid, tg, b, np.ones_like(b)) == pytest.approx(1.0)
