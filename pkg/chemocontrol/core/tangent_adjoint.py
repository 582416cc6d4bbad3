'''
Exact discrete tangent and adjoint of the forward scheme.

Differentiating one forward step at a base trajectory gives an instance of
the general linear system with (step n, base states at nodes n and n+1)

    r2 = u_n^s + f_n-              a2 = -f_n+
    b2 = s u_n^(s-1) v_{n+1}        c1 = grad v_{n+1}      d = u_n

and all other coefficients zero. The control direction enters the V
equation as ``w_n F_n`` where the weight ``w_n`` is ``v_n`` on cells with
``f_n >= 0`` (explicit branch) and ``v_{n+1}`` where ``f_n < 0`` (implicit
branch). Upwind directions are frozen at the base trajectory.
'''

from dataclasses import dataclass
from typing import Optional

import numpy as np

from chemocontrol.core.annotations import MultiplierNorms
from chemocontrol.core.errors import ArgumentError
from chemocontrol.core.forward import (
    ControlField,
    ModelParams,
    Trajectory,
    TimeGrid,
    control_inner,
    state_inner,
    state_norm
)
from chemocontrol.core.grid import Grid, ScalarField, flatten_faces, gradient_faces
from chemocontrol.core.linearized import (
    LinearCoefficients,
    solve_general_adjoint,
    solve_general_linear
)
from chemocontrol.core.logging_config import logger
from chemocontrol.core.solvers import SolverOptions
from chemocontrol.core.validation import require_finite, require_shape

__all__ = [
    'AdjointPair',
    'tangent_coefficients',
    'control_weight',
    'solve_tangent',
    'solve_adjoint',
    'adjoint_pullback',
    'transpose_check'
]


@dataclass(frozen=True, eq=False)
class AdjointPair:
    '''
    Node-indexed multipliers ``lam`` (of the u-equation) and ``eta`` (of the
    v-equation). The terminal node is exactly zero.
    '''
    grid: Grid
    time_grid: TimeGrid
    lam: np.ndarray
    eta: np.ndarray

    def __post_init__(self) -> None:
        shape = self.time_grid.series_shape(self.grid)
        for name in ('lam', 'eta'):
            values = np.array(getattr(self, name), dtype=float)
            require_shape(name, values, shape)
            require_finite(name, values)
            if np.any(values[-1] != 0.0):
                raise ArgumentError(f"'{name}' does not vanish at the final time.")
            values.flags.writeable = False
            object.__setattr__(self, name, values)

    @property
    def lambda_series(self) -> list[ScalarField]:
        return [ScalarField(self.grid, w) for w in self.lam]

    @property
    def eta_series(self) -> list[ScalarField]:
        return [ScalarField(self.grid, w) for w in self.eta]

    def norms(self) -> MultiplierNorms:
        '''``L2(Q)`` norms over nodes 0..N-1 and maximum norms.'''
        dt, vol = self.time_grid.dt, self.grid.cell_volume
        return {
            'lambda_l2': float(np.sqrt(dt * vol * np.sum(self.lam[:-1] ** 2))),
            'lambda_max': float(np.max(np.abs(self.lam))),
            'eta_l2': float(np.sqrt(dt * vol * np.sum(self.eta[:-1] ** 2))),
            'eta_max': float(np.max(np.abs(self.eta))),
        }


def _check_alignment(traj: Trajectory, *controls: ControlField) -> None:
    for control in controls:
        if control.time_grid != traj.time_grid or control.grid != traj.grid:
            raise ArgumentError("Control and trajectory are not aligned.")


def control_weight(traj: Trajectory, f: ControlField) -> np.ndarray:
    '''
    The state factor of the bilinear control term in the derivative of
    the scheme: ``v_n`` where ``f_n >= 0``, ``v_{n+1}`` where ``f_n < 0``,
    zero off the mask and at the last node.
    '''
    _check_alignment(traj, f)
    weight = np.zeros(traj.time_grid.series_shape(traj.grid))
    chosen = np.where(f.values[:-1] >= 0.0, traj.v[:-1], traj.v[1:])
    weight[:-1] = np.where(f.mask.indicator, chosen, 0.0)
    return weight


def tangent_coefficients(traj: Trajectory, f: ControlField, params: ModelParams) -> LinearCoefficients:
    '''The linear-system coefficients of the derivative of the forward scheme.'''
    _check_alignment(traj, f)
    grid, tg = traj.grid, traj.time_grid
    u = np.maximum(traj.u[:-1], 0.0)
    v_next = traj.v[1:]
    controls = f.values[:-1]
    s = params.s

    zero = np.zeros((tg.steps, *grid.cells))
    return LinearCoefficients(
        grid, tg,
        a1=zero,
        b1=zero,
        c1=np.stack([flatten_faces(gradient_faces(grid, w)) for w in v_next]),
        d=u,
        a2=-np.maximum(controls, 0.0),
        r2=u ** s + np.maximum(-controls, 0.0),
        b2=s * u ** (s - 1.0) * v_next,
        c2=np.zeros((tg.steps, grid.n_faces)))


def solve_tangent(
    traj: Trajectory,
    f: ControlField,
    params: ModelParams,
    F: ControlField,
    options: Optional[SolverOptions] = None
) -> tuple[np.ndarray, np.ndarray]:
    '''
    Directional derivative of the discrete flow ``f -> trajectory`` at
    ``f`` in the direction ``F``.

    Parameters
    ----------
    traj : Trajectory
        The forward run of ``f``.
    f : ControlField
        The base control.
    params : ModelParams
        Model parameters of the run.
    F : ControlField
        The direction.
    options : SolverOptions, optional
        CG settings; the linearized solves use ``linear_rtol``.

    Returns
    -------
    tuple[np.ndarray, np.ndarray]
        Node-indexed ``(U, V)`` with zero first node.

    Raises
    ------
    ArgumentError
        If the trajectory and the controls are not aligned.
    '''
    _check_alignment(traj, f, F)
    coeffs = tangent_coefficients(traj, f, params)
    g_v = control_weight(traj, f) * F.values
    return solve_general_linear(coeffs, np.zeros_like(g_v), g_v, options)


def solve_adjoint(
    traj: Trajectory,
    f: ControlField,
    params: ModelParams,
    g_lambda: np.ndarray,
    g_eta: np.ndarray,
    options: Optional[SolverOptions] = None
) -> AdjointPair:
    '''
    The transpose of ``solve_tangent``: for every direction ``F``,

        <(U, V), (g_lambda, g_eta)>_Q = <F, w eta>_Q

    with ``w = control_weight(traj, f)``. State series pair over nodes
    1..N, control series over nodes 0..N-1.

    Raises
    ------
    ArgumentError
        If the inputs are not aligned.
    '''
    _check_alignment(traj, f)
    coeffs = tangent_coefficients(traj, f, params)
    lam, eta = solve_general_adjoint(coeffs, np.asarray(g_lambda), np.asarray(g_eta), options)
    return AdjointPair(traj.grid, traj.time_grid, lam, eta)


def adjoint_pullback(traj: Trajectory, f: ControlField, adj: AdjointPair) -> np.ndarray:
    '''``w eta``: the adjoint mapped back to control space.'''
    return control_weight(traj, f) * adj.eta


def transpose_check(
    traj: Trajectory,
    f: ControlField,
    params: ModelParams,
    F: ControlField,
    w_lambda: np.ndarray,
    w_eta: np.ndarray,
    options: Optional[SolverOptions] = None
) -> float:
    '''
    Discrepancy of the duality identity between ``solve_tangent`` and
    ``solve_adjoint``, relative to the Cauchy-Schwarz bound of both sides.

    Returns
    -------
    float
        ``|<(U, V), w>_Q - <F, pullback>_Q| / scale``, or 0 when both sides
        and the scale vanish.
    '''
    grid, tg = traj.grid, traj.time_grid
    big_u, big_v = solve_tangent(traj, f, params, F, options)
    adj = solve_adjoint(traj, f, params, w_lambda, w_eta, options)
    pullback = adjoint_pullback(traj, f, adj)

    lhs = state_inner(grid, tg, big_u, w_lambda) + state_inner(grid, tg, big_v, w_eta)
    rhs = control_inner(grid, tg, F.values, pullback)
    scale = max(
        np.hypot(state_norm(grid, tg, big_u), state_norm(grid, tg, big_v))
        * np.hypot(state_norm(grid, tg, np.asarray(w_lambda)), state_norm(grid, tg, np.asarray(w_eta))),
        np.sqrt(control_inner(grid, tg, F.values, F.values) * control_inner(grid, tg, pullback, pullback)))
    if scale == 0.0:
        return 0.0
    discrepancy = abs(lhs - rhs) / scale
    logger.debug("transpose check: lhs %.15e rhs %.15e discrepancy %.3e", lhs, rhs, discrepancy)
    return float(discrepancy)
