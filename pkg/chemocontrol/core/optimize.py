'''
Minimization of the reduced cost ``f -> J(S(f), f)``.

Projected gradient descent runs the forward scheme on every trial control
of its Armijo line search; the gradient comes from the exact discrete
adjoint. Trial step sizes follow Barzilai-Borwein after the first
iteration unless switched off. The fixed-point method instead replaces the
control by the projected explicit solution of the pointwise optimality
condition, optionally damped.
'''

from dataclasses import dataclass
from typing import Optional

import numpy as np

from chemocontrol.core.annotations import IterationRecord
from chemocontrol.core.constants import (
    BB_STEP_BOUNDS,
    COST,
    CRITERION,
    DEFAULT_ARMIJO_C,
    DEFAULT_BACKTRACK_FACTOR,
    DEFAULT_DAMPING,
    DEFAULT_GRAD_TOL,
    DEFAULT_INITIAL_STEP,
    DEFAULT_MAX_ITERS,
    DEFAULT_MIN_STEP,
    FIXED_POINT,
    GRAD_TOL,
    GRADIENT,
    ITER,
    MAX_ITERS,
    MIN_STEP,
    OPTIMIZE_METHODS,
    RESIDUAL,
    STEP,
    UNCONSTRAINED
)
from chemocontrol.core.cost import (
    ControlConstraints,
    CostSpec,
    adjoint_sources,
    control_gradient,
    evaluate_cost,
    explicit_control,
    project_control
)
from chemocontrol.core.energy import regularity_criterion
from chemocontrol.core.errors import ArgumentError, ChemocontrolError
from chemocontrol.core.forward import (
    ControlField,
    ModelParams,
    TimeGrid,
    Trajectory,
    control_inner,
    control_norm,
    solve_forward
)
from chemocontrol.core.grid import ScalarField
from chemocontrol.core.logging_config import logger
from chemocontrol.core.solvers import SolverOptions
from chemocontrol.core.tangent_adjoint import AdjointPair, control_weight, solve_adjoint
from chemocontrol.core.validation import require_count, require_positive

__all__ = [
    'OptimizeOptions',
    'OptimizationReport',
    'ReducedCost',
    'optimality_residual',
    'projected_gradient_descent',
    'fixed_point_control',
    'minimize',
    'make_tracking_problem'
]


@dataclass(frozen=True)
class OptimizeOptions:
    '''
    Attributes
    ----------
    max_iters : int
        Iteration cap; 0 only evaluates the initial control.
    armijo_c : float
        Sufficient-decrease constant in (0, 1).
    backtrack_factor : float
        Step reduction per rejected trial, in (0, 1).
    initial_step : float
        Trial step of the first iteration (and of every iteration without
        Barzilai-Borwein steps).
    grad_tol : float
        Stop once the optimality residual is at most this value.
    min_step : float
        Give up once backtracking pushes the step below this value.
    bb_steps : bool
        Start each line search from the Barzilai-Borwein step.
    method : str
        ``gradient`` (projected gradient descent) or ``fixed_point``
        (projected explicit-control iteration).
    damping : float
        Weight of the new explicit control in each fixed-point update, in
        (0, 1].
    '''
    max_iters: int = DEFAULT_MAX_ITERS
    armijo_c: float = DEFAULT_ARMIJO_C
    backtrack_factor: float = DEFAULT_BACKTRACK_FACTOR
    initial_step: float = DEFAULT_INITIAL_STEP
    grad_tol: float = DEFAULT_GRAD_TOL
    min_step: float = DEFAULT_MIN_STEP
    bb_steps: bool = True
    method: str = GRADIENT
    damping: float = DEFAULT_DAMPING

    def __post_init__(self) -> None:
        require_count('max_iters', self.max_iters)
        object.__setattr__(self, 'max_iters', int(self.max_iters))
        for name in ('armijo_c', 'backtrack_factor'):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise ArgumentError(f"'{name}' must lie in (0, 1), got {value!r}.")
        require_positive('initial_step', self.initial_step)
        require_positive('grad_tol', self.grad_tol)
        require_positive('min_step', self.min_step)
        if self.method not in OPTIMIZE_METHODS:
            raise ArgumentError(f"'method' must be one of {OPTIMIZE_METHODS}, got {self.method!r}.")
        if not 0.0 < self.damping <= 1.0:
            raise ArgumentError(f"'damping' must lie in (0, 1], got {self.damping!r}.")


@dataclass(frozen=True, eq=False)
class OptimizationReport:
    '''
    History and outcome of a run. ``converged`` is true only when the
    residual tolerance was met.
    '''
    iterates: tuple[IterationRecord, ...]
    control: ControlField
    converged: bool
    reason: str
    trajectory: Trajectory
    adjoint: AdjointPair
    gradient: ControlField

    @property
    def initial_cost(self) -> float:
        return self.iterates[0][COST]

    @property
    def final_cost(self) -> float:
        return self.iterates[-1][COST]

    @property
    def residual(self) -> float:
        return self.iterates[-1][RESIDUAL]


@dataclass(frozen=True, eq=False)
class ReducedCost:
    '''The cost as a function of the control alone.'''
    u0: ScalarField
    v0: ScalarField
    params: ModelParams
    spec: CostSpec
    time_grid: TimeGrid
    options: SolverOptions = SolverOptions()

    def value(self, f: ControlField) -> tuple[float, Trajectory]:
        traj = solve_forward(self.u0, self.v0, f, self.params, self.time_grid, self.options)
        return evaluate_cost(traj, f, self.spec), traj

    def gradient(self, f: ControlField, traj: Trajectory) -> tuple[ControlField, AdjointPair]:
        g_lambda, g_eta = adjoint_sources(traj, self.spec)
        adj = solve_adjoint(traj, f, self.params, g_lambda, g_eta, self.options)
        return control_gradient(f, traj, adj, self.spec), adj


def optimality_residual(
    f: ControlField,
    grad: ControlField,
    constraints: ControlConstraints,
    step: float = 1.0
) -> float:
    '''
    The projected-gradient stationarity measure

        ||f - P(f - step * grad)||_{L2(Q)} / step

    which is zero exactly when the variational inequality holds. Without
    constraints it is ``||grad||_{L2(Q)}``.
    '''
    require_positive('step', step)
    grid, tg = f.grid, f.time_grid
    if constraints.kind == UNCONSTRAINED:
        return control_norm(grid, tg, grad.values)
    moved = project_control(f.with_values(f.values - step * grad.values), constraints)
    return control_norm(grid, tg, f.values - moved.values) / step


def _bb_step(f: ControlField, f_prev: ControlField, g: ControlField, g_prev: ControlField,
             fallback: float) -> float:
    grid, tg = f.grid, f.time_grid
    s = f.values - f_prev.values
    y = g.values - g_prev.values
    sy = control_inner(grid, tg, s, y)
    if sy <= 0.0:
        return fallback
    lo, hi = BB_STEP_BOUNDS
    return float(np.clip(control_inner(grid, tg, s, s) / sy, lo, hi))


def projected_gradient_descent(
    u0: ScalarField,
    v0: ScalarField,
    f0: ControlField,
    params: ModelParams,
    spec: CostSpec,
    opts: OptimizeOptions = OptimizeOptions(),
    options: Optional[SolverOptions] = None
) -> OptimizationReport:
    '''
    Minimize the reduced tracking cost over the admissible controls.

    Parameters
    ----------
    u0, v0 : ScalarField
        Initial states.
    f0 : ControlField
        Initial control; projected on entry.
    params : ModelParams
        Model parameters.
    spec : CostSpec
        The cost and the constraints.
    opts : OptimizeOptions
        Line search and stopping settings.
    options : SolverOptions, optional
        CG settings of every forward and adjoint solve.

    Returns
    -------
    OptimizationReport
        One record per accepted iterate, the final control, its trajectory,
        adjoint and gradient, and the termination reason.

    Raises
    ------
    CFLError, SolverError
        If a forward solve fails; the message notes the iteration and trial
        step.
    '''
    reduced = ReducedCost(u0, v0, params, spec, f0.time_grid, options or SolverOptions())
    constraints = spec.constraints

    f = project_control(f0, constraints)
    cost, traj = reduced.value(f)
    grad, adj = reduced.gradient(f, traj)
    step = 0.0
    f_prev: Optional[ControlField] = None
    g_prev: Optional[ControlField] = None
    records: list[IterationRecord] = []
    reason = MAX_ITERS

    for k in range(opts.max_iters + 1):
        residual = optimality_residual(f, grad, constraints)
        records.append({
            ITER: k,
            COST: cost,
            RESIDUAL: residual,
            STEP: step,
            CRITERION: regularity_criterion(traj, params),
        })  # type: ignore[misc]
        logger.info("iter %d J=%.12e residual=%.6e step=%.3e", k, cost, residual, step)
        if residual <= opts.grad_tol:
            reason = GRAD_TOL
            break
        if k == opts.max_iters:
            break

        if opts.bb_steps and f_prev is not None and g_prev is not None:
            tau = _bb_step(f, f_prev, grad, g_prev, opts.initial_step)
        else:
            tau = opts.initial_step

        accepted = False
        while tau >= opts.min_step:
            trial = project_control(f.with_values(f.values - tau * grad.values), constraints)
            moved = f.values - trial.values
            decrease = opts.armijo_c / tau * control_inner(f.grid, f.time_grid, moved, moved)
            try:
                trial_cost, trial_traj = reduced.value(trial)
            except ChemocontrolError as exc:
                exc.add_note(f"optimizer iteration {k}, trial step {tau!r}")
                raise
            if trial_cost <= cost - decrease:
                accepted = True
                break
            tau *= opts.backtrack_factor
        if not accepted:
            logger.warning("Backtracking stalled at iteration %d.", k)
            reason = MIN_STEP
            break

        f_prev, g_prev = f, grad
        f, cost, traj, step = trial, trial_cost, trial_traj, tau
        grad, adj = reduced.gradient(f, traj)

    converged = reason == GRAD_TOL
    if not converged:
        logger.warning("Optimization stopped without convergence (%s).", reason)
    return OptimizationReport(
        iterates=tuple(records),
        control=f,
        converged=converged,
        reason=reason,
        trajectory=traj,
        adjoint=adj,
        gradient=grad)


def fixed_point_control(
    u0: ScalarField,
    v0: ScalarField,
    f0: ControlField,
    params: ModelParams,
    spec: CostSpec,
    opts: OptimizeOptions = OptimizeOptions(method=FIXED_POINT),
    options: Optional[SolverOptions] = None
) -> OptimizationReport:
    '''
    Iterate the explicit control of the optimality system,

        f_{k+1} = P((1 - damping) f_k + damping g_k),
        g_k = explicit_control(w(f_k), eta(f_k))

    where ``w`` is the control weight and ``eta`` the second multiplier of
    the run at ``f_k``. A fixed point satisfies the projected optimality
    condition, so the stopping test is the same residual as in
    ``projected_gradient_descent``.

    Each update costs one forward and one adjoint solve. The map contracts
    when the state response to the control is weak compared to
    ``gamma_f``; otherwise lower ``damping`` or use the gradient method.

    Raises
    ------
    ArgumentError
        If ``gamma_f`` is zero; the explicit control needs a positive one.
    CFLError, SolverError
        If a forward solve fails; the message notes the iteration.
    '''
    if spec.gamma_f <= 0.0:
        raise ArgumentError("The fixed-point update needs a positive 'gamma_f'.")
    reduced = ReducedCost(u0, v0, params, spec, f0.time_grid, options or SolverOptions())
    constraints = spec.constraints

    f = project_control(f0, constraints)
    cost, traj = reduced.value(f)
    grad, adj = reduced.gradient(f, traj)
    records: list[IterationRecord] = []
    reason = MAX_ITERS

    for k in range(opts.max_iters + 1):
        residual = optimality_residual(f, grad, constraints)
        records.append({
            ITER: k,
            COST: cost,
            RESIDUAL: residual,
            STEP: 0.0 if k == 0 else opts.damping,
            CRITERION: regularity_criterion(traj, params),
        })  # type: ignore[misc]
        logger.info("fixed point %d J=%.12e residual=%.6e", k, cost, residual)
        if residual <= opts.grad_tol:
            reason = GRAD_TOL
            break
        if k == opts.max_iters:
            break

        target = explicit_control(control_weight(traj, f), adj.eta, spec.gamma_f, spec.q,
                                  f.mask, f.time_grid)
        blended = (1.0 - opts.damping) * f.values + opts.damping * target.values
        f = project_control(f.with_values(blended), constraints)
        try:
            cost, traj = reduced.value(f)
        except ChemocontrolError as exc:
            exc.add_note(f"fixed-point iteration {k}")
            raise
        grad, adj = reduced.gradient(f, traj)

    converged = reason == GRAD_TOL
    if not converged:
        logger.warning("Fixed-point iteration stopped without convergence (%s).", reason)
    return OptimizationReport(
        iterates=tuple(records),
        control=f,
        converged=converged,
        reason=reason,
        trajectory=traj,
        adjoint=adj,
        gradient=grad)


def minimize(
    u0: ScalarField,
    v0: ScalarField,
    f0: ControlField,
    params: ModelParams,
    spec: CostSpec,
    opts: OptimizeOptions = OptimizeOptions(),
    options: Optional[SolverOptions] = None
) -> OptimizationReport:
    '''Run the method named by ``opts.method``.'''
    if opts.method == FIXED_POINT:
        return fixed_point_control(u0, v0, f0, params, spec, opts, options)
    return projected_gradient_descent(u0, v0, f0, params, spec, opts, options)


def make_tracking_problem(
    u0: ScalarField,
    v0: ScalarField,
    f_star: ControlField,
    params: ModelParams,
    tg: TimeGrid,
    options: Optional[SolverOptions] = None
) -> tuple[np.ndarray, np.ndarray]:
    '''
    Desired states reachable by construction: the forward run of a known
    control ``f_star``.
    '''
    traj = solve_forward(u0, v0, f_star, params, tg, options)
    return np.array(traj.u), np.array(traj.v)
