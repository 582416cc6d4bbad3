'''
Diagnostics of a forward run: mass, pointwise bounds, the regularized free
energy

    E(u, z) = (s / 4) int g(u) + (1 / 2) int |grad z|^2,   z = sqrt(v + alpha^2)

with ``g(u) = (u + 1) log(u + 1) - u`` for s = 1 and ``u^s / (s (s - 1))``
for s > 1, the dissipation integrals of the energy inequality, and the
regularity monitor ``||u^s||_{L^q}``.

Nothing here asserts an inequality; the constants involved are unknown.
'''

from dataclasses import dataclass

import numpy as np

from chemocontrol.core.annotations import DiagnosticsRecord
from chemocontrol.core.constants import (
    CRITERION_CUM,
    DISSIPATION,
    DISSIPATION_CUM,
    ENERGY,
    ENTROPY_DISSIPATION,
    ENTROPY_DISSIPATION_CUM,
    FISHER_Z,
    FISHER_Z_CUM,
    GRAD_Z_SQ,
    HESSIAN_Z_SQ,
    HESSIAN_Z_SQ_CUM,
    LOG_BRANCH_GUARD,
    MASS,
    MAX_U,
    MAX_V,
    MAX_Z,
    MIN_U,
    MIN_V,
    MIN_Z,
    TIME
)
from chemocontrol.core.errors import ArgumentError
from chemocontrol.core.forward import ControlField, ModelParams, Trajectory
from chemocontrol.core.grid import (
    Grid,
    ScalarField,
    divergence_faces,
    faces_to_cells,
    gradient_faces,
    space_time_norm
)
from chemocontrol.core.validation import require_nonnegative, require_positive

__all__ = [
    'DiagnosticsReport',
    'z_transform',
    'free_energy',
    'entropy_density',
    'regularity_criterion',
    'diagnostics'
]


@dataclass(frozen=True, eq=False)
class DiagnosticsReport:
    '''
    Attributes
    ----------
    records : tuple[DiagnosticsRecord, ...]
        One record per time node.
    criterion : float
        ``||u^s||_{L^q(Q)}`` over the whole run.
    control_lq : float
        ``||f||_{L^q(Q)}`` of the control that produced the run.
    min_z : float
        Smallest value of ``z`` over all nodes; never below ``alpha``.
    '''
    records: tuple[DiagnosticsRecord, ...]
    criterion: float
    control_lq: float
    min_z: float

    def column(self, key: str) -> np.ndarray:
        '''The values of one record key, in node order.'''
        return np.array([record[key] for record in self.records])  # type: ignore[literal-required]


def _z(v: np.ndarray, alpha: float) -> np.ndarray:
    require_positive('alpha', alpha)
    require_nonnegative('v', v)
    return np.sqrt(np.maximum(v, 0.0) + alpha ** 2)


def z_transform(v: ScalarField, alpha: float) -> ScalarField:
    '''
    ``z = sqrt(v + alpha^2)``, so ``z >= alpha`` pointwise.

    Raises
    ------
    ArgumentError
        If alpha is not positive or v is negative beyond round-off.
    '''
    return ScalarField(v.grid, _z(v.values, alpha))


def entropy_density(u: np.ndarray, s: float) -> np.ndarray:
    '''
    The entropy ``g(u)`` of the free energy, pointwise.

    Raises
    ------
    ArgumentError
        If s lies in ``(1, 1 + 1e-12)``, where the power branch is
        numerically meaningless and the log branch does not apply.
    '''
    if s == 1.0:
        return (u + 1.0) * np.log1p(u) - u
    if s < 1.0 + LOG_BRANCH_GUARD:
        raise ArgumentError(f"'s' = {s!r} is too close to 1 for the power branch of the entropy.")
    return u ** s / (s * (s - 1.0))


def _grad_sq(grid: Grid, w: np.ndarray) -> float:
    return float(sum(np.sum(c ** 2) for c in gradient_faces(grid, w))) * grid.cell_volume


def free_energy(u: ScalarField, v: ScalarField, params: ModelParams) -> float:
    '''
    The regularized free energy ``(s/4) int g(u) + (1/2) int |grad z|^2``.

    Parameters
    ----------
    u, v : ScalarField
        Nonnegative states.
    params : ModelParams
        Supplies s and alpha.

    Returns
    -------
    float
        The energy, with the gradient term taken on faces.
    '''
    require_nonnegative('u', u.values)
    grid = u.grid
    entropy = float(np.sum(entropy_density(np.maximum(u.values, 0.0), params.s))) * grid.cell_volume
    return 0.25 * params.s * entropy + 0.5 * _grad_sq(grid, _z(v.values, params.alpha))


def regularity_criterion(traj: Trajectory, params: ModelParams) -> float:
    '''
    ``||u^s||_{L^q(Q)}`` with the left-endpoint rule over nodes 0..N-1.
    '''
    grid, tg = traj.grid, traj.time_grid
    return space_time_norm(grid, traj.u[:-1] ** params.s, params.q, params.q, tg.dt)


def _cumulative(values: np.ndarray, dt: float) -> np.ndarray:
    '''Left-endpoint running integral: entry n sums nodes 0..n-1.'''
    return np.concatenate([[0.0], np.cumsum(dt * values[:-1])])


def diagnostics(traj: Trajectory, f: ControlField, params: ModelParams) -> DiagnosticsReport:
    '''
    Per-node monitoring of a forward run.

    Parameters
    ----------
    traj : Trajectory
        The run to be monitored.
    f : ControlField
        The control that produced it.
    params : ModelParams
        Model parameters.

    Returns
    -------
    DiagnosticsReport
        Mass, bounds, free energy, the dissipation integrands and their
        running integrals, and the running criterion
        ``||u^s||_{L^q((0, t_n) x Omega)}``.
    '''
    if f.time_grid != traj.time_grid or f.grid != traj.grid:
        raise ArgumentError("The control is not aligned with the trajectory.")
    grid, tg = traj.grid, traj.time_grid
    vol = grid.cell_volume
    s, q = params.s, params.q

    mass, energy, grad_z_sq = [], [], []
    dissipation, entropy_diss, hessian, fisher = [], [], [], []
    min_z, max_z = [], []
    for u, v in zip(traj.u, traj.v):
        u = np.maximum(u, 0.0)
        z = _z(v, params.alpha)
        z_faces = gradient_faces(grid, z)
        z_cells = faces_to_cells(grid, tuple(c ** 2 for c in z_faces))

        mass.append(float(np.sum(u)) * vol)
        energy.append(free_energy(ScalarField(grid, u), ScalarField(grid, v), params))
        grad_z_sq.append(_grad_sq(grid, z))
        dissipation.append(float(np.sum(u ** s * z_cells)) * vol)
        entropy_diss.append(_grad_sq(grid, (u + 1.0) ** (0.5 * s)))
        hessian.append(float(np.sum(divergence_faces(grid, z_faces) ** 2)) * vol)
        fisher.append(float(np.sum(z_cells ** 2 / z ** 2)) * vol)
        min_z.append(float(z.min()))
        max_z.append(float(z.max()))

    power = np.array([float(np.sum(u ** (s * q))) * vol for u in np.maximum(traj.u, 0.0)])
    criterion = _cumulative(power, tg.dt) ** (1.0 / q)
    cumulative = {
        key: _cumulative(np.array(values), tg.dt)
        for key, values in (
            (DISSIPATION_CUM, dissipation),
            (ENTROPY_DISSIPATION_CUM, entropy_diss),
            (HESSIAN_Z_SQ_CUM, hessian),
            (FISHER_Z_CUM, fisher))}

    records: list[DiagnosticsRecord] = []
    for n, t in enumerate(tg.times):
        records.append({
            TIME: float(t),
            MASS: mass[n],
            MIN_U: float(traj.u[n].min()),
            MAX_U: float(traj.u[n].max()),
            MIN_V: float(traj.v[n].min()),
            MAX_V: float(traj.v[n].max()),
            ENERGY: energy[n],
            GRAD_Z_SQ: grad_z_sq[n],
            CRITERION_CUM: float(criterion[n]),
            MIN_Z: min_z[n],
            MAX_Z: max_z[n],
            DISSIPATION: dissipation[n],
            ENTROPY_DISSIPATION: entropy_diss[n],
            HESSIAN_Z_SQ: hessian[n],
            FISHER_Z: fisher[n],
            DISSIPATION_CUM: float(cumulative[DISSIPATION_CUM][n]),
            ENTROPY_DISSIPATION_CUM: float(cumulative[ENTROPY_DISSIPATION_CUM][n]),
            HESSIAN_Z_SQ_CUM: float(cumulative[HESSIAN_Z_SQ_CUM][n]),
            FISHER_Z_CUM: float(cumulative[FISHER_Z_CUM][n]),
        })  # type: ignore[misc]

    control_lq = space_time_norm(grid, f.values[:-1], q, q, tg.dt)
    return DiagnosticsReport(
        records=tuple(records),
        criterion=float(criterion[-1]),
        control_lq=control_lq,
        min_z=min(min_z))
