from typing import Optional

import numpy as np

from chemocontrol.api.config import RunConfig
from chemocontrol.core.constants import FIXED_POINT
from chemocontrol.core.cost import (
    ControlConstraints,
    CostSpec,
    adjoint_sources,
    control_gradient,
    evaluate_cost,
    project_control
)
from chemocontrol.core.energy import DiagnosticsReport, diagnostics
from chemocontrol.core.errors import ArgumentError
from chemocontrol.core.forward import (
    ControlField,
    ModelParams,
    TimeGrid,
    Trajectory,
    solve_forward
)
from chemocontrol.core.grid import Grid, ScalarField, SubdomainMask
from chemocontrol.core.optimize import (
    OptimizationReport,
    OptimizeOptions,
    fixed_point_control,
    make_tracking_problem,
    minimize
)
from chemocontrol.core.solvers import SolverOptions
from chemocontrol.core.tangent_adjoint import (
    AdjointPair,
    solve_adjoint,
    solve_tangent,
    transpose_check
)

__all__ = [
    'ControlProblem'
]


class ControlProblem:
    '''
    The ControlProblem class bundles a grid, a time grid, model parameters,
    initial states, a control subdomain and (optionally) a tracking cost,
    and runs the forward, derivative and optimization routines on them.

    Setters return the object itself so that calls can be chained.
    '''

    def __init__(
        self,
        grid: Grid,
        time_grid: TimeGrid,
        params: Optional[ModelParams] = None,
        mask: Optional[SubdomainMask] = None,
        solver: Optional[SolverOptions] = None
    ) -> None:
        self.grid = grid
        self.time_grid = time_grid
        self.params = params or ModelParams()
        self.mask = mask or SubdomainMask.full(grid)
        if self.mask.grid != grid:
            raise ArgumentError("The control subdomain lives on a different grid.")
        self.solver = solver or SolverOptions()
        self.__u0 = ScalarField.constant(grid, 1.0)
        self.__v0 = ScalarField.constant(grid, 1.0)
        self.__constraints = ControlConstraints()
        self.__cost: Optional[CostSpec] = None

    def __repr__(self) -> str:
        cells = self.grid.cells
        steps = self.time_grid.steps
        T = self.time_grid.T
        params = self.params
        return self.__class__.__name__ + f"({cells=}, {steps=}, {T=}, {params=})"

    @classmethod
    def from_config(cls, config: RunConfig) -> 'ControlProblem':
        '''
        A problem with the grid, time grid, model, subdomain, solver
        settings, initial states and constraints of a run configuration.
        The cost is not set.
        '''
        problem = cls(config.grid, config.time_grid, config.params, config.mask, config.solver)
        return problem.set_initial_state(config.u0, config.v0).set_constraints(config.constraints)

    @property
    def u0(self) -> ScalarField:
        return self.__u0

    @property
    def v0(self) -> ScalarField:
        return self.__v0

    @property
    def constraints(self) -> ControlConstraints:
        return self.__constraints

    @property
    def cost(self) -> CostSpec:
        '''
        The tracking cost. Raises an ArgumentError if none has been set.
        '''
        if self.__cost is None:
            raise ArgumentError("No tracking cost has been set on this problem.")
        return self.__cost

    def set_initial_state(self, u0: ScalarField, v0: ScalarField) -> 'ControlProblem':
        if u0.grid != self.grid or v0.grid != self.grid:
            raise ArgumentError("Initial states live on a different grid.")
        self.__u0, self.__v0 = u0, v0
        return self

    def set_constraints(self, constraints: ControlConstraints) -> 'ControlProblem':
        self.__constraints = constraints
        if self.__cost is not None:
            self.__cost = self.__with_constraints(self.__cost, constraints)
        return self

    def set_solver(self, solver: SolverOptions) -> 'ControlProblem':
        self.solver = solver
        return self

    def set_cost(
        self,
        u_d: np.ndarray,
        v_d: np.ndarray,
        gamma_u: float = 1.0,
        gamma_v: float = 1.0,
        gamma_f: float = 1e-4
    ) -> 'ControlProblem':
        '''
        Track the given node-indexed desired states, with the problem's
        model exponents and constraints.
        '''
        shape = self.time_grid.series_shape(self.grid)
        if np.shape(u_d) != shape or np.shape(v_d) != shape:
            raise ArgumentError(f"Desired states must have shape {shape}.")
        self.__cost = CostSpec(
            gamma_u=gamma_u,
            gamma_v=gamma_v,
            gamma_f=gamma_f,
            s=self.params.s,
            q=self.params.q,
            u_d=u_d,
            v_d=v_d,
            constraints=self.__constraints)
        return self

    def set_tracking_target(
        self,
        f_star: ControlField,
        gamma_u: float = 1.0,
        gamma_v: float = 1.0,
        gamma_f: float = 1e-4
    ) -> 'ControlProblem':
        '''Track the states produced by a known control.'''
        u_d, v_d = self.targets(f_star)
        return self.set_cost(u_d, v_d, gamma_u, gamma_v, gamma_f)

    @staticmethod
    def __with_constraints(spec: CostSpec, constraints: ControlConstraints) -> CostSpec:
        return CostSpec(spec.gamma_u, spec.gamma_v, spec.gamma_f, spec.s, spec.q,
                        spec.u_d, spec.v_d, constraints)

    def zero_control(self) -> ControlField:
        return ControlField.zeros(self.time_grid, self.mask)

    def constant_control(self, value: float) -> ControlField:
        return ControlField.constant(self.time_grid, self.mask, value)

    def project(self, f: ControlField) -> ControlField:
        return project_control(f, self.__constraints)

    def simulate(self, f: Optional[ControlField] = None, solver: Optional[SolverOptions] = None) -> Trajectory:
        '''Run the forward scheme; without a control, the uncontrolled run.'''
        f = f if f is not None else self.zero_control()
        return solve_forward(self.__u0, self.__v0, f, self.params, self.time_grid, solver or self.solver)

    def diagnose(self, f: Optional[ControlField] = None) -> tuple[Trajectory, DiagnosticsReport]:
        f = f if f is not None else self.zero_control()
        traj = self.simulate(f)
        return traj, diagnostics(traj, f, self.params)

    def targets(self, f_star: ControlField) -> tuple[np.ndarray, np.ndarray]:
        return make_tracking_problem(self.__u0, self.__v0, f_star, self.params, self.time_grid, self.solver)

    def evaluate(self, f: ControlField, solver: Optional[SolverOptions] = None) -> float:
        '''The reduced cost ``J(S(f), f)``.'''
        return evaluate_cost(self.simulate(f, solver), f, self.cost)

    def gradient(self, f: ControlField) -> tuple[ControlField, Trajectory, AdjointPair]:
        '''
        The reduced gradient at ``f``, with the trajectory and adjoint it
        was computed from.
        '''
        traj = self.simulate(f)
        g_lambda, g_eta = adjoint_sources(traj, self.cost)
        adj = solve_adjoint(traj, f, self.params, g_lambda, g_eta, self.solver)
        return control_gradient(f, traj, adj, self.cost), traj, adj

    def tangent(self, f: ControlField, F: ControlField,
                traj: Optional[Trajectory] = None) -> tuple[np.ndarray, np.ndarray]:
        traj = traj if traj is not None else self.simulate(f)
        return solve_tangent(traj, f, self.params, F, self.solver)

    def transpose_check(
        self,
        f: ControlField,
        F: ControlField,
        w_lambda: np.ndarray,
        w_eta: np.ndarray,
        traj: Optional[Trajectory] = None
    ) -> float:
        traj = traj if traj is not None else self.simulate(f)
        return transpose_check(traj, f, self.params, F, w_lambda, w_eta, self.solver)

    def optimize(
        self,
        f0: Optional[ControlField] = None,
        options: Optional[OptimizeOptions] = None
    ) -> OptimizationReport:
        '''Run the method of ``options`` from ``f0`` (zero by default).'''
        f0 = f0 if f0 is not None else self.zero_control()
        return minimize(
            self.__u0, self.__v0, f0, self.params, self.cost,
            options or OptimizeOptions(), self.solver)

    def fixed_point(
        self,
        f0: Optional[ControlField] = None,
        options: Optional[OptimizeOptions] = None
    ) -> OptimizationReport:
        f0 = f0 if f0 is not None else self.zero_control()
        return fixed_point_control(
            self.__u0, self.__v0, f0, self.params, self.cost,
            options or OptimizeOptions(method=FIXED_POINT), self.solver)
