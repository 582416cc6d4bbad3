'''
The general linear parabolic system

    U_t - lap U + a1 U + b1 V + div(U c1) + div(d grad V) = gU
    V_t - lap V + a2 V + r2 V + b2 U + c2 . grad V       = gV

with zero initial data and no-flux boundaries, discretized with the same
operators as the forward scheme, and the exact algebraic transpose of that
discretization.

Step n maps node n to node n+1 using the coefficients and sources of node
n. The V-equation is solved first; the U-equation then uses ``V`` at node
n+1 in its ``b1`` and ``d`` couplings, mirroring the order of the forward
step. Diffusion and the nonnegative reaction ``r2`` are implicit; every
other term is explicit. ``c1`` is transported with the upwind rule of the
forward flux and ``c2 . grad V`` is the centred average of face products.

Every step is a fixed sparse linear map, so its transpose is formed with
``.T`` and the backward sweep is the transpose of the forward sweep up to
the linear-solver tolerance.
'''

from dataclasses import dataclass, replace
from typing import Iterator, Optional

import numpy as np
import scipy.sparse as sp

from chemocontrol.core.errors import ArgumentError, CFLError
from chemocontrol.core.forward import TimeGrid, admissible_dt
from chemocontrol.core.grid import (
    Grid,
    face_average_matrix,
    gradient_matrix,
    laplacian_matrix,
    unflatten_faces,
    upwind_matrix
)
from chemocontrol.core.solvers import SolverOptions, solve_spd
from chemocontrol.core.validation import require_finite, require_nonnegative, require_shape

__all__ = [
    'LinearCoefficients',
    'solve_general_linear',
    'solve_general_adjoint'
]

CELL_COEFFICIENTS = ('a1', 'b1', 'd', 'a2', 'r2', 'b2')
FACE_COEFFICIENTS = ('c1', 'c2')


@dataclass(frozen=True, eq=False)
class LinearCoefficients:
    '''
    Step-indexed coefficients of the general linear system.

    Cell coefficients (``a1``, ``b1``, ``d``, ``a2``, ``r2``, ``b2``) have shape
    ``(steps, *cells)``; face coefficients (``c1``, ``c2``) have shape
    ``(steps, n_faces)`` in the flattened face order of
    ``grid.flatten_faces``, with zero boundary faces. ``r2`` is the part of
    the V-reaction treated implicitly and must be nonnegative.
    '''
    grid: Grid
    time_grid: TimeGrid
    a1: np.ndarray
    b1: np.ndarray
    c1: np.ndarray
    d: np.ndarray
    a2: np.ndarray
    r2: np.ndarray
    b2: np.ndarray
    c2: np.ndarray

    def __post_init__(self) -> None:
        steps = self.time_grid.steps
        for name in CELL_COEFFICIENTS + FACE_COEFFICIENTS:
            values = np.array(getattr(self, name), dtype=float)
            shape = (steps, *self.grid.cells) if name in CELL_COEFFICIENTS else (steps, self.grid.n_faces)
            require_shape(name, values, shape)
            require_finite(name, values)
            if name in FACE_COEFFICIENTS:
                for row in values:
                    for k, faces in enumerate(unflatten_faces(self.grid, row)):
                        if np.any(np.take(faces, 0, axis=k) != 0.0) or np.any(np.take(faces, -1, axis=k) != 0.0):
                            raise ArgumentError(f"'{name}' has nonzero boundary faces.")
            values.flags.writeable = False
            object.__setattr__(self, name, values)
        require_nonnegative('r2', self.r2, slack=0.0)

    @classmethod
    def zeros(cls, grid: Grid, time_grid: TimeGrid) -> 'LinearCoefficients':
        cells = np.zeros((time_grid.steps, *grid.cells))
        faces = np.zeros((time_grid.steps, grid.n_faces))
        return cls(grid, time_grid,
                   a1=cells, b1=cells, c1=faces, d=cells,
                   a2=cells, r2=cells, b2=cells, c2=faces)

    def replace(self, **changes: np.ndarray) -> 'LinearCoefficients':
        return replace(self, **changes)

    def check_cfl(self) -> None:
        '''
        Raise a CFLError if the upwind transport by ``c1`` violates the
        forward step bound at some step.
        '''
        dt = self.time_grid.dt
        for row in self.c1:
            limit = admissible_dt(self.grid, (row,))
            if dt > limit:
                raise CFLError(dt, limit)


@dataclass(frozen=True, eq=False)
class _StepOperators:
    '''
    The sparse pieces of one step:

        A_v V' = R_vv V + R_vu U + dt gV
        A_u U' = R_uu U + R_uv V' + dt gU
    '''
    a_v: sp.csr_matrix
    a_u: sp.csr_matrix
    r_vv: sp.csr_matrix
    r_vu: sp.csr_matrix
    r_uu: sp.csr_matrix
    r_uv: sp.csr_matrix


def _operators(coeffs: LinearCoefficients) -> Iterator[_StepOperators]:
    grid = coeffs.grid
    dt = coeffs.time_grid.dt
    n = grid.n_cells
    identity = sp.identity(n, format='csr')
    lap = laplacian_matrix(grid)
    grad = gradient_matrix(grid)
    div = -grad.T
    average = face_average_matrix(grid)
    a_u = (identity - dt * lap).tocsr()

    for k in range(coeffs.time_grid.steps):
        c1, c2 = coeffs.c1[k], coeffs.c2[k]
        upwind = upwind_matrix(grid, c1)
        d_face = upwind @ coeffs.d[k].ravel()
        yield _StepOperators(
            a_v=(a_u + sp.diags(dt * coeffs.r2[k].ravel())).tocsr(),
            a_u=a_u,
            r_vv=(identity - sp.diags(dt * coeffs.a2[k].ravel())
                  - dt * average @ sp.diags(c2) @ grad).tocsr(),
            r_vu=sp.diags(-dt * coeffs.b2[k].ravel(), format='csr'),
            r_uu=(identity - sp.diags(dt * coeffs.a1[k].ravel())
                  - dt * div @ sp.diags(c1) @ upwind).tocsr(),
            r_uv=(sp.diags(-dt * coeffs.b1[k].ravel()) - dt * div @ sp.diags(d_face) @ grad).tocsr())


def _check_sources(coeffs: LinearCoefficients, **series: np.ndarray) -> None:
    shape = coeffs.time_grid.series_shape(coeffs.grid)
    for name, values in series.items():
        require_shape(name, np.asarray(values), shape)
        require_finite(name, values)


def solve_general_linear(
    coeffs: LinearCoefficients,
    g_u: np.ndarray,
    g_v: np.ndarray,
    options: Optional[SolverOptions] = None
) -> tuple[np.ndarray, np.ndarray]:
    '''
    March the general linear system forward from zero initial data.

    Parameters
    ----------
    coeffs : LinearCoefficients
        Step-indexed coefficients.
    g_u, g_v : np.ndarray
        Node-indexed sources of shape ``(steps + 1, *cells)``; step n uses
        node n, the last node is unused.
    options : SolverOptions, optional
        CG settings; solves use ``linear_rtol`` and start from zero, so the
        map from sources to solution is linear.

    Returns
    -------
    tuple[np.ndarray, np.ndarray]
        The node-indexed series ``(U, V)``; node 0 is zero.
    '''
    options = options or SolverOptions()
    _check_sources(coeffs, g_u=g_u, g_v=g_v)
    coeffs.check_cfl()
    grid, tg = coeffs.grid, coeffs.time_grid
    dt = tg.dt

    big_u = np.zeros(tg.series_shape(grid))
    big_v = np.zeros(tg.series_shape(grid))
    for n, ops in enumerate(_operators(coeffs)):
        u, v = big_u[n].ravel(), big_v[n].ravel()
        rhs_v = ops.r_vv @ v + ops.r_vu @ u + dt * g_v[n].ravel()
        v_next = solve_spd(ops.a_v, rhs_v, options.linear_rtol, options.maxiter_factor,
                           context=f'linear V step {n}')
        rhs_u = ops.r_uu @ u + ops.r_uv @ v_next + dt * g_u[n].ravel()
        u_next = solve_spd(ops.a_u, rhs_u, options.linear_rtol, options.maxiter_factor,
                           context=f'linear U step {n}')
        big_u[n + 1] = u_next.reshape(grid.cells)
        big_v[n + 1] = v_next.reshape(grid.cells)
    return big_u, big_v


def solve_general_adjoint(
    coeffs: LinearCoefficients,
    g_lambda: np.ndarray,
    g_eta: np.ndarray,
    options: Optional[SolverOptions] = None
) -> tuple[np.ndarray, np.ndarray]:
    '''
    March the transpose of ``solve_general_linear`` backward in time.

    With ``(U, V) = solve_general_linear(coeffs, gU, gV)`` and
    ``(lam, eta) = solve_general_adjoint(coeffs, g_lambda, g_eta)``,

        sum_{n=1..N} dt vol (U_n g_lambda_n + V_n g_eta_n)
            = sum_{n=0..N-1} dt vol (lam_n gU_n + eta_n gV_n)

    up to the linear-solver tolerance.

    Parameters
    ----------
    coeffs : LinearCoefficients
        The coefficients of the forward system.
    g_lambda, g_eta : np.ndarray
        Node-indexed sources; node 0 is unused.
    options : SolverOptions, optional
        CG settings.

    Returns
    -------
    tuple[np.ndarray, np.ndarray]
        The node-indexed multipliers ``(lam, eta)``; node N is zero.
    '''
    options = options or SolverOptions()
    _check_sources(coeffs, g_lambda=g_lambda, g_eta=g_eta)
    coeffs.check_cfl()
    grid, tg = coeffs.grid, coeffs.time_grid
    dt = tg.dt

    lam = np.zeros(tg.series_shape(grid))
    eta = np.zeros(tg.series_shape(grid))
    z_u = np.zeros(grid.n_cells)
    z_v = np.zeros(grid.n_cells)
    for n, ops in reversed(list(enumerate(_operators(coeffs)))):
        x_u = dt * g_lambda[n + 1].ravel() + z_u
        x_v = dt * g_eta[n + 1].ravel() + z_v
        lam_n = solve_spd(ops.a_u.T.tocsr(), x_u, options.linear_rtol, options.maxiter_factor,
                          context=f'adjoint U step {n}')
        x_v = x_v + ops.r_uv.T @ lam_n
        eta_n = solve_spd(ops.a_v.T.tocsr(), x_v, options.linear_rtol, options.maxiter_factor,
                          context=f'adjoint V step {n}')
        z_u = ops.r_uu.T @ lam_n + ops.r_vu.T @ eta_n
        z_v = ops.r_vv.T @ eta_n
        lam[n] = lam_n.reshape(grid.cells)
        eta[n] = eta_n.reshape(grid.cells)
    return lam, eta

