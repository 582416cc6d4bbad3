'''
Chemocontrol Data-Oriented API
------------------------------

The functions in this module serve as endpoints for the four batch
commands. Each one takes a resolved ``RunConfig``, runs the ``core``
routines on it, writes its report files into an output directory and
returns the summary as a dictionary of simple data types (str, int, float,
bool, list, dict, None), which is also what ends up in the JSON report.

For a more behaviour-oriented interface to the ``core`` functions, see the
``ControlProblem`` class in the ``classes`` module.
'''

from pathlib import Path
from typing import Optional

import numpy as np

from chemocontrol.api.classes.problem import ControlProblem
from chemocontrol.api.config import RunConfig
from chemocontrol.core.annotations import (
    GradcheckReport,
    RunSummary,
    TaylorRecord
)
from chemocontrol.core.constants import (
    CONTROL_PREFIX,
    DESIRED_U_PREFIX,
    DESIRED_V_PREFIX,
    DIAGNOSE,
    DIAGNOSTICS_COLUMNS,
    DIAGNOSTICS_CSV,
    ENERGY_COLUMNS,
    ENERGY_CSV,
    ETA_PREFIX,
    FIELDS_DIR,
    FILE,
    FORWARD,
    GRADCHECK_JSON,
    ITERATION_COLUMNS,
    ITERATIONS_CSV,
    LAMBDA_PREFIX,
    OPTIMIZE,
    SUMMARY_JSON,
    TAYLOR_EPSILONS,
    U_PREFIX,
    V_PREFIX
)
from chemocontrol.core.cost import cost_breakdown, cost_directional_derivative
from chemocontrol.core.energy import DiagnosticsReport
from chemocontrol.core.errors import ConfigError
from chemocontrol.core.field_io import read_series, write_csv, write_json, write_series
from chemocontrol.core.forward import (
    ControlField,
    Trajectory,
    admissible_dt,
    control_inner,
    state_norm
)
from chemocontrol.core.grid import gradient_faces
from chemocontrol.core.logging_config import logger

__all__ = [
    'run_forward',
    'run_diagnose',
    'run_gradcheck',
    'run_optimize'
]


###########
# Helpers #
###########

def _output_dir(config: RunConfig, output_dir: Optional[Path | str]) -> Path:
    return Path(output_dir) if output_dir is not None else config.output_dir


def _run_admissible_dt(traj: Trajectory) -> float:
    '''The smallest admissible step over the advected gradients of a run.'''
    grid = traj.grid
    return min(admissible_dt(grid, gradient_faces(grid, v)) for v in traj.v[1:])


def _dump_run(directory: Path, traj: Trajectory, f: ControlField) -> None:
    fields = directory / FIELDS_DIR
    write_series(fields, U_PREFIX, traj.grid, traj.u)
    write_series(fields, V_PREFIX, traj.grid, traj.v)
    write_series(fields, CONTROL_PREFIX, traj.grid, f.values)


def _forward_summary(command: str, traj: Trajectory, report: DiagnosticsReport,
                     config: RunConfig) -> RunSummary:
    last = report.records[-1]
    return {
        'command': command,
        'steps': traj.time_grid.steps,
        'dt': traj.time_grid.dt,
        'admissible_dt': _run_admissible_dt(traj),
        'final_mass': last['mass'],
        'final_min_u': last['min_u'],
        'final_min_v': last['min_v'],
        'final_max_v': last['max_v'],
        'criterion': report.criterion,
        'control_lq': report.control_lq,
        'config': config.resolved,
    }


def _relative_difference(a: float, b: float) -> float:
    scale = max(abs(a), abs(b))
    return 0.0 if scale == 0.0 else abs(a - b) / scale


def _with_cost(problem: ControlProblem, config: RunConfig) -> ControlProblem:
    '''
    Set the configured tracking cost; desired states are either generated
    from a constant ``f_star`` on the mask or read from series dumps.
    '''
    settings = config.cost
    if settings.desired == FILE:
        if settings.directory is None:
            raise ConfigError('cost.directory', "required for desired states from files")
        nodes = config.time_grid.nodes
        u_d = read_series(settings.directory, settings.u_prefix, config.grid, nodes)
        v_d = read_series(settings.directory, settings.v_prefix, config.grid, nodes)
        return problem.set_cost(u_d, v_d, settings.gamma_u, settings.gamma_v, settings.gamma_f)
    f_star = problem.constant_control(settings.f_star)
    return problem.set_tracking_target(f_star, settings.gamma_u, settings.gamma_v, settings.gamma_f)


#############
# Endpoints #
#############

def run_forward(config: RunConfig, output_dir: Optional[Path | str] = None) -> RunSummary:
    '''
    Run the forward scheme on the configured initial control.

    Writes ``diagnostics.csv`` (one row per time node), ``summary.json``
    and, if enabled, the ``u``, ``v`` and ``f`` series under ``fields/``.

    Raises
    ------
    CFLError, SolverError
        If the forward run fails.
    FieldIOError
        If an output file cannot be written.
    '''
    directory = _output_dir(config, output_dir)
    logger.info("forward: %s cells, %d steps", config.grid.cells, config.time_grid.steps)
    problem = ControlProblem.from_config(config)
    traj, report = problem.diagnose(config.f0)

    write_csv(directory / DIAGNOSTICS_CSV, DIAGNOSTICS_COLUMNS, report.records)
    if config.dump_fields:
        _dump_run(directory, traj, config.f0)
    summary = _forward_summary(FORWARD, traj, report, config)
    write_json(directory / SUMMARY_JSON, summary)
    logger.info("forward: final mass %.12e", summary['final_mass'])
    return summary


def run_diagnose(config: RunConfig, output_dir: Optional[Path | str] = None) -> RunSummary:
    '''
    The forward run with the energy-inequality ingredients.

    Writes everything ``run_forward`` writes plus ``energy.csv``, whose rows
    hold the free energy, the bounds of ``z``, the dissipation integrands
    and their running time integrals. No inequality between them is
    asserted.
    '''
    directory = _output_dir(config, output_dir)
    logger.info("diagnose: %s cells, %d steps", config.grid.cells, config.time_grid.steps)
    problem = ControlProblem.from_config(config)
    traj, report = problem.diagnose(config.f0)

    write_csv(directory / DIAGNOSTICS_CSV, DIAGNOSTICS_COLUMNS, report.records)
    write_csv(directory / ENERGY_CSV, ENERGY_COLUMNS, report.records)
    if config.dump_fields:
        _dump_run(directory, traj, config.f0)
    summary = _forward_summary(DIAGNOSE, traj, report, config)
    summary['min_z'] = report.min_z
    write_json(directory / SUMMARY_JSON, summary)
    logger.info("diagnose: criterion %.12e, min z %.6e", report.criterion, report.min_z)
    return summary


def run_gradcheck(config: RunConfig, output_dir: Optional[Path | str] = None) -> GradcheckReport:
    '''
    Check the derivatives of the configured instance.

    With a generator seeded from ``gradcheck.seed`` the check draws

    * ``transpose_samples`` triples of a control direction and state
      weights, and reports the discrepancy of the duality identity between
      tangent and adjoint;
    * ``directions`` control directions, and reports for each the relative
      error of the central difference of the reduced cost against the
      adjoint gradient, and the relative difference between the tangent
      route and the adjoint route;

    then reports the tangent Taylor remainders for decreasing epsilon and
    whether the zero direction gives exact zero tangents. Finite
    differences, Taylor remainders and the base run all use state solves as
    tight as the linearized ones.

    The base control is ``gradcheck.base_control`` on the mask, or the
    configured initial control for ``'initial'``. Bases with entries at
    zero sit on the kink of the bilinear term and are best avoided.

    Writes ``gradcheck.json``.
    '''
    directory = _output_dir(config, output_dir)
    settings = config.gradcheck
    problem = ControlProblem.from_config(config)
    problem = _with_cost(problem.set_solver(problem.solver.tightened()), config)
    grid, tg = config.grid, config.time_grid
    spec = problem.cost
    rng = np.random.default_rng(settings.seed)

    if isinstance(settings.base_control, str):
        f = config.f0
    else:
        f = problem.constant_control(settings.base_control)
    logger.info("gradcheck: %s cells, %d steps, seed %d", grid.cells, tg.steps, settings.seed)

    def direction() -> ControlField:
        return f.with_values(rng.standard_normal(f.values.shape))

    grad, traj, adj = problem.gradient(f)

    transpose = []
    for _ in range(settings.transpose_samples):
        F = direction()
        w_lambda = rng.standard_normal(traj.u.shape)
        w_eta = rng.standard_normal(traj.v.shape)
        transpose.append(problem.transpose_check(f, F, w_lambda, w_eta, traj))

    gradient, route = [], []
    eps = settings.epsilon
    for _ in range(settings.directions):
        F = direction()
        adjoint_route = control_inner(grid, tg, grad.values, F.values)
        plus = problem.evaluate(f.with_values(f.values + eps * F.values))
        minus = problem.evaluate(f.with_values(f.values - eps * F.values))
        gradient.append(_relative_difference((plus - minus) / (2.0 * eps), adjoint_route))
        tangent = problem.tangent(f, F, traj)
        tangent_route = cost_directional_derivative(traj, f, spec, tangent, F)
        route.append(_relative_difference(tangent_route, adjoint_route))

    F = direction()
    big_u, big_v = problem.tangent(f, F, traj)
    taylor: list[TaylorRecord] = []
    for epsilon in TAYLOR_EPSILONS:
        moved = problem.simulate(f.with_values(f.values + epsilon * F.values))
        error = float(np.hypot(
            state_norm(grid, tg, moved.u - traj.u - epsilon * big_u),
            state_norm(grid, tg, moved.v - traj.v - epsilon * big_v)))
        taylor.append({'epsilon': epsilon, 'error': error})
    (e1, r1), (e2, r2) = [(t['epsilon'], t['error']) for t in taylor[:2]]
    order = float(np.log(r1 / r2) / np.log(e1 / e2)) if r1 > 0.0 and r2 > 0.0 else None

    zero_u, zero_v = problem.tangent(f, problem.zero_control(), traj)
    zero_direction = not (np.any(zero_u) or np.any(zero_v))

    report: GradcheckReport = {
        'transpose': transpose,
        'transpose_max': max(transpose),
        'transpose_tol': settings.transpose_tol,
        'gradient': gradient,
        'gradient_max': max(gradient),
        'gradient_tol': settings.gradient_tol,
        'route_agreement': route,
        'route_agreement_max': max(route),
        'route_tol': settings.route_tol,
        'taylor': taylor,
        'taylor_order': order,
        'zero_direction': zero_direction,
        'multipliers': adj.norms(),
        'passed': False,
        'config': config.resolved,
    }
    report['passed'] = (
        report['transpose_max'] <= settings.transpose_tol
        and report['gradient_max'] <= settings.gradient_tol
        and report['route_agreement_max'] <= settings.route_tol
        and zero_direction)
    write_json(directory / GRADCHECK_JSON, report)

    log = logger.info if report['passed'] else logger.warning
    log("gradcheck: transpose %.3e, gradient %.3e, routes %.3e, taylor order %s, passed %s",
        report['transpose_max'], report['gradient_max'], report['route_agreement_max'],
        'n/a' if order is None else f"{order:.3f}", report['passed'])
    return report


def run_optimize(config: RunConfig, output_dir: Optional[Path | str] = None) -> RunSummary:
    '''
    Minimize the configured tracking problem from the configured initial
    control, by projected gradient descent or by the damped fixed-point
    iteration, as ``optimize.method`` selects.

    Writes ``iterations.csv`` (iter, J, residual, step, criterion) and
    ``summary.json``. With field dumps enabled, the optimized run, its
    adjoint and the desired states go under ``fields/``; the desired-state
    dumps can be read back by a later run with ``cost.desired = 'file'``.

    Raises
    ------
    FieldIOError
        If desired states are read from files that are missing or do not
        match the grid.
    CFLError, SolverError
        If a forward solve fails.
    '''
    directory = _output_dir(config, output_dir)
    problem = _with_cost(ControlProblem.from_config(config), config)
    logger.info("optimize: %s, %s cells, %d steps, at most %d iterations",
                config.optimize.method, config.grid.cells, config.time_grid.steps, config.optimize.max_iters)
    result = problem.optimize(config.f0, config.optimize)

    write_csv(directory / ITERATIONS_CSV, ITERATION_COLUMNS, result.iterates)
    if config.dump_fields:
        fields = directory / FIELDS_DIR
        _dump_run(directory, result.trajectory, result.control)
        write_series(fields, LAMBDA_PREFIX, config.grid, result.adjoint.lam)
        write_series(fields, ETA_PREFIX, config.grid, result.adjoint.eta)
        write_series(fields, DESIRED_U_PREFIX, config.grid, problem.cost.u_d)
        write_series(fields, DESIRED_V_PREFIX, config.grid, problem.cost.v_d)

    summary: RunSummary = {
        'command': OPTIMIZE,
        'method': config.optimize.method,
        'steps': config.time_grid.steps,
        'dt': config.time_grid.dt,
        'converged': result.converged,
        'reason': result.reason,
        'iterations': len(result.iterates) - 1,
        'initial_cost': result.initial_cost,
        'cost': cost_breakdown(result.trajectory, result.control, problem.cost),
        'residual': result.residual,
        'criterion': result.iterates[-1]['criterion'],
        'multipliers': result.adjoint.norms(),
        'config': config.resolved,
    }
    write_json(directory / SUMMARY_JSON, summary)
    logger.info("optimize: %s after %d iterations, J %.12e -> %.12e",
                result.reason, summary['iterations'], result.initial_cost, result.final_cost)
    return summary
