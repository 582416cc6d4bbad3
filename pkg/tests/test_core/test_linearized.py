import numpy as np
import pytest

from chemocontrol.core.errors import ArgumentError, CFLError
from chemocontrol.core.forward import TimeGrid, state_inner
from chemocontrol.core.grid import Grid, flatten_faces, gradient_faces
from chemocontrol.core.linearized import (
    LinearCoefficients,
    solve_general_adjoint,
    solve_general_linear
)

params = pytest.mark.parametrize


def random_coefficients(cells: tuple[int, ...], steps: int, seed: int) -> LinearCoefficients:
    '''Coefficients of moderate size whose transport respects the step bound.'''
    rng = np.random.default_rng(seed)
    grid = Grid(cells, (1.0,) * len(cells))
    tg = TimeGrid(0.05, steps)
    shape = (steps, *cells)

    def faces(scale: float) -> np.ndarray:
        return np.stack([
            scale * flatten_faces(gradient_faces(grid, rng.standard_normal(cells)))
            for _ in range(steps)])

    return LinearCoefficients(
        grid, tg,
        a1=rng.standard_normal(shape),
        b1=rng.standard_normal(shape),
        c1=faces(0.01),
        d=rng.uniform(0.0, 1.0, shape),
        a2=rng.standard_normal(shape),
        r2=rng.uniform(0.0, 2.0, shape),
        b2=rng.standard_normal(shape),
        c2=faces(0.1))


def series(coeffs: LinearCoefficients, rng: np.random.Generator) -> np.ndarray:
    return rng.standard_normal(coeffs.time_grid.series_shape(coeffs.grid))


def test_zero_sources_give_zero() -> None:
    coeffs = random_coefficients((6,), 5, 0)
    zero = np.zeros(coeffs.time_grid.series_shape(coeffs.grid))
    big_u, big_v = solve_general_linear(coeffs, zero, zero)
    assert not np.any(big_u) and not np.any(big_v)
    lam, eta = solve_general_adjoint(coeffs, zero, zero)
    assert not np.any(lam) and not np.any(eta)


@params('cells', [(5,), (3, 4)])
def test_unit_source_accumulates(cells: tuple[int, ...]) -> None:
    grid = Grid(cells, (1.0,) * len(cells))
    tg = TimeGrid(0.5, 10)
    coeffs = LinearCoefficients.zeros(grid, tg)
    big_u, big_v = solve_general_linear(coeffs, np.zeros(tg.series_shape(grid)), np.ones(tg.series_shape(grid)))
    assert not np.any(big_u)
    for n in range(tg.nodes):
        assert big_v[n] == pytest.approx(np.full(cells, n * tg.dt), rel=1e-12, abs=1e-15)


@params('cells, seed', [((8,), 1), ((4, 3), 2)])
def test_superposition(cells: tuple[int, ...], seed: int) -> None:
    coeffs = random_coefficients(cells, 6, seed)
    rng = np.random.default_rng(seed + 100)
    g1, g2, h1, h2 = (series(coeffs, rng) for _ in range(4))
    u1, v1 = solve_general_linear(coeffs, g1, h1)
    u2, v2 = solve_general_linear(coeffs, g2, h2)
    u12, v12 = solve_general_linear(coeffs, g1 + 2.0 * g2, h1 + 2.0 * h2)
    scale = np.abs(u12).max() + np.abs(v12).max()
    assert np.abs(u12 - u1 - 2.0 * u2).max() <= 1e-11 * scale
    assert np.abs(v12 - v1 - 2.0 * v2).max() <= 1e-11 * scale


@params('cells, seed', [((8,), 3), ((5,), 4), ((4, 3), 5), ((3, 2, 2), 6)])
def test_general_transpose_identity(cells: tuple[int, ...], seed: int) -> None:
    coeffs = random_coefficients(cells, 7, seed)
    grid, tg = coeffs.grid, coeffs.time_grid
    rng = np.random.default_rng(seed + 200)
    g_u, g_v, g_lambda, g_eta = (series(coeffs, rng) for _ in range(4))

    big_u, big_v = solve_general_linear(coeffs, g_u, g_v)
    lam, eta = solve_general_adjoint(coeffs, g_lambda, g_eta)
    lhs = state_inner(grid, tg, big_u, g_lambda) + state_inner(grid, tg, big_v, g_eta)
    # the adjoint pairs with the sources over the nodes a step consumes
    rhs = tg.dt * grid.cell_volume * float(np.sum(lam[:-1] * g_u[:-1]) + np.sum(eta[:-1] * g_v[:-1]))
    weight = tg.dt * grid.cell_volume
    scale = weight * np.sqrt(np.sum(big_u[1:] ** 2) + np.sum(big_v[1:] ** 2)) \
        * np.sqrt(np.sum(g_lambda[1:] ** 2) + np.sum(g_eta[1:] ** 2))
    assert abs(lhs - rhs) <= 1e-10 * scale
    assert not np.any(lam[-1]) and not np.any(eta[-1])


def test_rejects_negative_implicit_reaction() -> None:
    coeffs = random_coefficients((4,), 2, 7)
    with pytest.raises(ArgumentError):
        coeffs.replace(r2=-np.ones((2, 4)))


def test_rejects_boundary_faces() -> None:
    coeffs = random_coefficients((4,), 2, 8)
    c1 = np.zeros((2, coeffs.grid.n_faces))
    c1[0, 0] = 1.0
    with pytest.raises(ArgumentError):
        coeffs.replace(c1=c1)


def test_rejects_wrong_shape() -> None:
    coeffs = random_coefficients((4,), 2, 9)
    with pytest.raises(ArgumentError):
        coeffs.replace(a1=np.zeros((3, 4)))


def test_transport_respects_the_step_bound() -> None:
    grid = Grid((10,), (1.0,))
    tg = TimeGrid(1.0, 10)
    x, = grid.centers()
    fast = flatten_faces(gradient_faces(grid, 50.0 * x))
    coeffs = LinearCoefficients.zeros(grid, tg).replace(c1=np.tile(fast, (10, 1)))
    zero = np.zeros(tg.series_shape(grid))
    with pytest.raises(CFLError):
        solve_general_linear(coeffs, zero, zero)
    with pytest.raises(CFLError):
        solve_general_adjoint(coeffs, zero, zero)
