'''
Positivity-preserving IMEX integrator of the controlled
chemotaxis-consumption system

    u_t - lap u = -div(u grad v)
    v_t - lap v = -u^s v + f v 1_{Omega_c}

with homogeneous Neumann boundary conditions.

One step maps node n to node n+1 with the control of node n:

* v: backward-Euler diffusion, consumption ``u^s v`` and the negative part
  of the control implicit-diagonal, the positive part of the control
  explicit. Every diagonal term is nonnegative, so ``v_next >= 0``.
* u: backward-Euler diffusion, explicit upwind chemotaxis flux built on
  ``grad v_next``. Nonnegative under ``dt <= cfl_dt``.
'''

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp

from chemocontrol.core.constants import (
    CFL_EPSILON,
    CRITICAL_Q,
    DEFAULT_ALPHA,
    DEFAULT_Q,
    DEFAULT_S,
    Q_WARNING_MARGIN
)
from chemocontrol.core.errors import ArgumentError, CFLError, SolverError
from chemocontrol.core.grid import (
    Grid,
    ScalarField,
    SubdomainMask,
    divergence_faces,
    gradient_faces,
    inner_product,
    laplacian_matrix,
    upwind_faces
)
from chemocontrol.core.logging_config import logger
from chemocontrol.core.solvers import SolverOptions, solve_spd
from chemocontrol.core.validation import (
    require_count,
    require_finite,
    require_nonnegative,
    require_positive,
    require_shape
)

__all__ = [
    'ModelParams',
    'TimeGrid',
    'Trajectory',
    'ControlField',
    'step_forward',
    'solve_forward',
    'cfl_dt',
    'step_admissible_dt',
    'advance',
    'admissible_dt',
    'state_inner',
    'control_inner',
    'state_norm',
    'control_norm'
]


@dataclass(frozen=True)
class ModelParams:
    '''
    Attributes
    ----------
    s : float
        Consumption exponent, at least 1.
    alpha : float
        Positive shift of the transform ``z = sqrt(v + alpha^2)``.
    q : float
        Regularity (and control-cost) exponent, above 5/2.
    '''
    s: float = DEFAULT_S
    alpha: float = DEFAULT_ALPHA
    q: float = DEFAULT_Q

    def __post_init__(self) -> None:
        if not (np.isfinite(self.s) and self.s >= 1.0):
            raise ArgumentError(f"'s' must be >= 1, got {self.s!r}.")
        require_positive('alpha', self.alpha)
        if not (np.isfinite(self.q) and self.q > CRITICAL_Q):
            raise ArgumentError(f"'q' must be > {CRITICAL_Q}, got {self.q!r}.")
        if self.q < CRITICAL_Q + Q_WARNING_MARGIN:
            logger.warning("q = %r is close to the critical exponent %r.", self.q, CRITICAL_Q)


@dataclass(frozen=True)
class TimeGrid:
    '''``steps`` uniform steps of size ``dt = T / steps`` on ``[0, T]``.'''
    T: float
    steps: int
    dt: float = field(init=False)

    def __post_init__(self) -> None:
        require_positive('T', self.T)
        require_count('steps', self.steps, minimum=1)
        object.__setattr__(self, 'T', float(self.T))
        object.__setattr__(self, 'steps', int(self.steps))
        object.__setattr__(self, 'dt', self.T / self.steps)

    @property
    def nodes(self) -> int:
        return self.steps + 1

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.nodes) * self.dt

    def series_shape(self, grid: Grid) -> tuple[int, ...]:
        '''Shape of a node-indexed series on the given grid.'''
        return (self.nodes, *grid.cells)


def _frozen_series(name: str, values: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    values = np.array(values, dtype=float)
    require_shape(name, values, shape)
    require_finite(name, values)
    values.flags.writeable = False
    return values


@dataclass(frozen=True, eq=False)
class Trajectory:
    '''
    States of a forward run at every time node. ``u`` and ``v`` have shape
    ``(steps + 1, *cells)``.
    '''
    grid: Grid
    time_grid: TimeGrid
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self) -> None:
        shape = self.time_grid.series_shape(self.grid)
        u = _frozen_series('u', self.u, shape)
        v = _frozen_series('v', self.v, shape)
        require_nonnegative('u', u)
        require_nonnegative('v', v)
        object.__setattr__(self, 'u', u)
        object.__setattr__(self, 'v', v)

    @property
    def u_series(self) -> list[ScalarField]:
        return [ScalarField(self.grid, w) for w in self.u]

    @property
    def v_series(self) -> list[ScalarField]:
        return [ScalarField(self.grid, w) for w in self.v]

    def at(self, n: int) -> tuple[ScalarField, ScalarField]:
        '''The state pair of node n.'''
        return ScalarField(self.grid, self.u[n]), ScalarField(self.grid, self.v[n])


@dataclass(frozen=True, eq=False)
class ControlField:
    '''
    A control value per time node and cell. Entries outside the mask are
    set to exactly zero on construction.
    '''
    time_grid: TimeGrid
    mask: SubdomainMask
    values: np.ndarray

    def __post_init__(self) -> None:
        values = _frozen_series(
            'values', self.values, self.time_grid.series_shape(self.mask.grid))
        values = np.where(self.mask.indicator, values, 0.0)
        values.flags.writeable = False
        object.__setattr__(self, 'values', values)

    @classmethod
    def zeros(cls, time_grid: TimeGrid, mask: SubdomainMask) -> 'ControlField':
        return cls(time_grid, mask, np.zeros(time_grid.series_shape(mask.grid)))

    @classmethod
    def constant(cls, time_grid: TimeGrid, mask: SubdomainMask, value: float) -> 'ControlField':
        return cls(time_grid, mask, np.full(time_grid.series_shape(mask.grid), float(value)))

    @property
    def grid(self) -> Grid:
        return self.mask.grid

    @property
    def f_series(self) -> list[ScalarField]:
        return [ScalarField(self.grid, w) for w in self.values]

    def at(self, n: int) -> ScalarField:
        return ScalarField(self.grid, self.values[n])

    def with_values(self, values: np.ndarray) -> 'ControlField':
        '''A control on the same time grid and mask.'''
        return ControlField(self.time_grid, self.mask, values)


#############################
# Space-time inner products #
#############################

def state_inner(grid: Grid, time_grid: TimeGrid, a: np.ndarray, b: np.ndarray) -> float:
    '''
    ``dt * cell_volume`` weighted pairing of two state series over the
    nodes a step produces (1..N).
    '''
    return time_grid.dt * inner_product(grid, a[1:], b[1:])


def control_inner(grid: Grid, time_grid: TimeGrid, a: np.ndarray, b: np.ndarray) -> float:
    '''
    ``dt * cell_volume`` weighted pairing of two control-like series over
    the nodes a step consumes (0..N-1).
    '''
    return time_grid.dt * inner_product(grid, a[:-1], b[:-1])


def state_norm(grid: Grid, time_grid: TimeGrid, a: np.ndarray) -> float:
    return float(np.sqrt(state_inner(grid, time_grid, a, a)))


def control_norm(grid: Grid, time_grid: TimeGrid, a: np.ndarray) -> float:
    return float(np.sqrt(control_inner(grid, time_grid, a, a)))


#############
# Time step #
#############

def admissible_dt(grid: Grid, velocity: tuple[np.ndarray, ...]) -> float:
    '''``h_min / (2 dim max|velocity| + eps)`` for a face velocity.'''
    peak = max(float(np.max(np.abs(c))) if c.size else 0.0 for c in velocity)
    return grid.h_min / (2.0 * grid.dim * peak + CFL_EPSILON)


def cfl_dt(u: ScalarField, v: ScalarField, params: ModelParams) -> float:
    '''
    Largest step for which an explicit upwind transport along ``grad v``
    keeps the cell density nonnegative.

    This is the bound of the given ``v``. A step transports along the
    gradient of its own v-update instead, which can be much steeper (a
    flat ``v`` next to a peak of ``u`` has no gradient yet), so
    ``step_forward`` checks against ``step_admissible_dt``.

    Parameters
    ----------
    u : ScalarField
        The cell density (the bound does not depend on it).
    v : ScalarField
        The chemical concentration whose face gradient is the velocity.
    params : ModelParams
        Model parameters (the bound does not depend on them).

    Returns
    -------
    float
        ``h_min / (2 * dim * max_faces |grad v| + 1e-30)``.
    '''
    return admissible_dt(v.grid, gradient_faces(v.grid, v.values))


def _v_update(
    grid: Grid,
    u: np.ndarray,
    v: np.ndarray,
    f: np.ndarray,
    params: ModelParams,
    dt: float,
    diffusion: sp.spmatrix,
    options: SolverOptions
) -> np.ndarray:
    consumption = np.maximum(u, 0.0) ** params.s
    f_plus = np.maximum(f, 0.0)
    f_minus = np.maximum(-f, 0.0)

    a_v = diffusion + sp.diags(dt * (consumption + f_minus).ravel())
    rhs_v = (v + dt * f_plus * v).ravel()
    return solve_spd(a_v, rhs_v, options.rtol, options.maxiter_factor,
                     x0=v.ravel(), context='v-update').reshape(grid.cells)


def step_admissible_dt(
    u: ScalarField,
    v: ScalarField,
    f: ScalarField,
    params: ModelParams,
    dt: float,
    options: SolverOptions = SolverOptions()
) -> float:
    '''
    The bound ``step_forward`` enforces for a step of size ``dt``: the
    admissible step for the face gradient of the v-update, which itself
    depends on ``dt``. A step of size ``dt`` passes the CFL check exactly
    when ``dt`` is at most this value.
    '''
    if not (u.grid == v.grid == f.grid):
        raise ArgumentError("State and control fields live on different grids.")
    require_positive('dt', dt)
    grid = u.grid
    diffusion = sp.identity(grid.n_cells, format='csr') - dt * laplacian_matrix(grid)
    v_next = _v_update(grid, u.values, v.values, f.values, params, dt, diffusion, options)
    return admissible_dt(grid, gradient_faces(grid, v_next))


def advance(
    grid: Grid,
    u: np.ndarray,
    v: np.ndarray,
    f: np.ndarray,
    params: ModelParams,
    dt: float,
    options: SolverOptions = SolverOptions()
) -> tuple[np.ndarray, np.ndarray]:
    '''
    One IMEX step on raw cell arrays; see ``step_forward``.

    Raises
    ------
    CFLError
        If ``dt`` exceeds the admissible step for ``grad v_next``.
    SolverError
        If an implicit solve does not converge.
    '''
    diffusion = sp.identity(grid.n_cells, format='csr') - dt * laplacian_matrix(grid)
    v_next = _v_update(grid, u, v, f, params, dt, diffusion, options)

    velocity = gradient_faces(grid, v_next)
    limit = admissible_dt(grid, velocity)
    logger.debug("cfl margin dt / admissible = %.3e", dt / limit)
    if dt > limit:
        raise CFLError(dt, limit)

    upwind = upwind_faces(grid, u, velocity)
    flux = tuple(w * c for w, c in zip(upwind, velocity))
    rhs_u = (u - dt * divergence_faces(grid, flux)).ravel()
    u_next = solve_spd(diffusion, rhs_u, options.rtol, options.maxiter_factor,
                       x0=u.ravel(), context='u-update').reshape(grid.cells)
    return u_next, v_next


def step_forward(
    u: ScalarField,
    v: ScalarField,
    f: ScalarField,
    params: ModelParams,
    dt: float,
    options: SolverOptions = SolverOptions()
) -> tuple[ScalarField, ScalarField]:
    '''
    Advance the state pair by one time step.

    The v-update solves

        (I - dt L + dt diag(u^s) + dt diag(f-)) v_next = v + dt f+ v

    and the u-update

        (I - dt L) u_next = u - dt div(u_up grad v_next)

    where ``u_up`` is the upwind cell of each face. Both solves are warm
    started from the current state, which keeps the u-update conservative
    to round-off.

    Parameters
    ----------
    u, v : ScalarField
        Nonnegative states at the current node.
    f : ScalarField
        The control at the current node, already zero off the control
        subdomain.
    params : ModelParams
        Model parameters.
    dt : float
        Time step.
    options : SolverOptions
        CG settings.

    Returns
    -------
    tuple[ScalarField, ScalarField]
        ``(u_next, v_next)``.

    Raises
    ------
    ArgumentError
        If the states are negative or live on different grids.
    CFLError
        If ``dt`` exceeds ``step_admissible_dt``, the bound for the
        gradient of ``v_next``.
    SolverError
        If a linear solve does not converge.
    '''
    if not (u.grid == v.grid == f.grid):
        raise ArgumentError("State and control fields live on different grids.")
    require_positive('dt', dt)
    require_nonnegative('u', u.values)
    require_nonnegative('v', v.values)
    u_next, v_next = advance(u.grid, u.values, v.values, f.values, params, dt, options)
    return ScalarField(u.grid, u_next), ScalarField(v.grid, v_next)


def solve_forward(
    u0: ScalarField,
    v0: ScalarField,
    f: ControlField,
    params: ModelParams,
    tg: TimeGrid,
    options: Optional[SolverOptions] = None
) -> Trajectory:
    '''
    Run ``tg.steps`` forward steps from ``(u0, v0)``, step n using the
    control of node n.

    Raises
    ------
    ArgumentError
        If the control is not aligned with ``tg`` or the grids differ.
    CFLError, SolverError
        Propagated from the step.
    '''
    options = options or SolverOptions()
    grid = u0.grid
    if not (grid == v0.grid == f.grid):
        raise ArgumentError("Initial data and control live on different grids.")
    if f.time_grid != tg:
        raise ArgumentError("The control is not aligned with the time grid.")
    require_nonnegative('u0', u0.values)
    require_nonnegative('v0', v0.values)

    u = np.empty(tg.series_shape(grid))
    v = np.empty(tg.series_shape(grid))
    u[0], v[0] = u0.values, v0.values
    for n in range(tg.steps):
        u[n + 1], v[n + 1] = advance(grid, u[n], v[n], f.values[n], params, tg.dt, options)
        if not (np.all(np.isfinite(u[n + 1])) and np.all(np.isfinite(v[n + 1]))):
            raise SolverError(float('nan'), n + 1, f"step {n}: non-finite state")
    logger.debug("forward run: %d steps, final mass %.12e",
                 tg.steps, float(u[-1].sum()) * grid.cell_volume)
    return Trajectory(grid, tg, u, v)
