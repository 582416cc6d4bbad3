'''
The tracking cost

    J = (gamma_u / (s q)) int |u - u_d|^(s q)
      + (gamma_v / 2) int |v - v_d|^2
      + (gamma_f / q) int_{Omega_c} |f|^q

its adjoint sources, the reduced gradient, the pointwise explicit control
and the projection onto box constraints.

State terms are summed over nodes 1..N, the control term over nodes
0..N-1, each with the weight ``dt * cell_volume``.
'''

from dataclasses import dataclass
from typing import Optional, overload

import numpy as np
from numpy.typing import ArrayLike

from chemocontrol.core.annotations import CostBreakdown
from chemocontrol.core.constants import BOX, CRITICAL_Q, UNCONSTRAINED
from chemocontrol.core.errors import ArgumentError
from chemocontrol.core.forward import (
    ControlField,
    TimeGrid,
    Trajectory,
    control_inner,
    state_inner
)
from chemocontrol.core.grid import SubdomainMask
from chemocontrol.core.tangent_adjoint import AdjointPair, control_weight
from chemocontrol.core.validation import (
    require_finite,
    require_nonnegative,
    require_positive,
    require_shape
)

__all__ = [
    'ControlConstraints',
    'CostSpec',
    'evaluate_cost',
    'cost_breakdown',
    'signed_power',
    'adjoint_sources',
    'stationarity',
    'control_gradient',
    'cost_directional_derivative',
    'explicit_control',
    'project_control'
]


@dataclass(frozen=True)
class ControlConstraints:
    '''
    Admissible control values: ``unconstrained``, or ``box`` with
    ``lower <= f <= upper`` in every cell and node.
    '''
    kind: str = UNCONSTRAINED
    lower: Optional[float] = None
    upper: Optional[float] = None

    def __post_init__(self) -> None:
        if self.kind == UNCONSTRAINED:
            if self.lower is not None or self.upper is not None:
                raise ArgumentError("Unconstrained controls take no bounds.")
        elif self.kind == BOX:
            if self.lower is None or self.upper is None:
                raise ArgumentError("Box constraints need a lower and an upper bound.")
            require_finite('lower', self.lower)
            require_finite('upper', self.upper)
            if self.lower > self.upper:
                raise ArgumentError(f"Empty box [{self.lower!r}, {self.upper!r}].")
        else:
            raise ArgumentError(f"Unknown constraint kind {self.kind!r}.")

    @classmethod
    def box(cls, lower: float, upper: float) -> 'ControlConstraints':
        return cls(BOX, float(lower), float(upper))

    @property
    def bounded(self) -> bool:
        return self.kind == BOX


@dataclass(frozen=True, eq=False)
class CostSpec:
    '''
    Weights, exponents and desired states of the tracking cost.

    ``u_d`` and ``v_d`` are node-indexed series on the solver's time grid.
    A positive control weight or a bounded constraint set is required.
    '''
    gamma_u: float
    gamma_v: float
    gamma_f: float
    s: float
    q: float
    u_d: np.ndarray
    v_d: np.ndarray
    constraints: ControlConstraints = ControlConstraints()

    def __post_init__(self) -> None:
        require_positive('gamma_u', self.gamma_u)
        require_nonnegative('gamma_v', self.gamma_v, slack=0.0)
        require_nonnegative('gamma_f', self.gamma_f, slack=0.0)
        if not (np.isfinite(self.s) and self.s >= 1.0):
            raise ArgumentError(f"'s' must be >= 1, got {self.s!r}.")
        if not (np.isfinite(self.q) and self.q > CRITICAL_Q):
            raise ArgumentError(f"'q' must be > {CRITICAL_Q}, got {self.q!r}.")
        if self.gamma_f == 0.0 and not self.constraints.bounded:
            raise ArgumentError("A zero control weight needs bounded constraints.")
        for name in ('u_d', 'v_d'):
            values = np.array(getattr(self, name), dtype=float)
            require_finite(name, values)
            values.flags.writeable = False
            object.__setattr__(self, name, values)
        if self.u_d.shape != self.v_d.shape:
            raise ArgumentError("Desired states have different shapes.")

    def check_alignment(self, traj: Trajectory) -> None:
        shape = traj.time_grid.series_shape(traj.grid)
        require_shape('u_d', self.u_d, shape)
        require_shape('v_d', self.v_d, shape)


@overload
def signed_power(x: float, r: float) -> float: ...
@overload
def signed_power(x: np.ndarray, r: float) -> np.ndarray: ...
def signed_power(x: ArrayLike, r: float) -> ArrayLike:
    '''
    ``sgn(x) |x|^r`` with ``sgn(0) = 0``.

    Raises
    ------
    ArgumentError
        If r is not positive.
    '''
    require_positive('r', r)
    values = np.sign(x) * np.abs(x) ** r
    if np.ndim(values) == 0:
        return float(values)
    return values


def cost_breakdown(traj: Trajectory, f: ControlField, spec: CostSpec) -> CostBreakdown:
    '''The three terms of the cost and their sum.'''
    spec.check_alignment(traj)
    if f.time_grid != traj.time_grid or f.grid != traj.grid:
        raise ArgumentError("The control is not aligned with the trajectory.")
    grid, tg = traj.grid, traj.time_grid
    sq = spec.s * spec.q
    ones = np.ones(tg.series_shape(grid))

    tracking_u = spec.gamma_u / sq * state_inner(grid, tg, np.abs(traj.u - spec.u_d) ** sq, ones)
    diff_v = traj.v - spec.v_d
    tracking_v = 0.5 * spec.gamma_v * state_inner(grid, tg, diff_v, diff_v)
    control = spec.gamma_f / spec.q * control_inner(grid, tg, np.abs(f.values) ** spec.q, ones)
    return {
        'tracking_u': tracking_u,
        'tracking_v': tracking_v,
        'control': control,
        'total': tracking_u + tracking_v + control,
    }


def evaluate_cost(traj: Trajectory, f: ControlField, spec: CostSpec) -> float:
    '''
    The tracking cost of a trajectory and the control that produced it.

    Raises
    ------
    ArgumentError
        If the series are misaligned.
    '''
    return cost_breakdown(traj, f, spec)['total']


def adjoint_sources(traj: Trajectory, spec: CostSpec) -> tuple[np.ndarray, np.ndarray]:
    '''
    ``g_lambda = gamma_u sgn(u - u_d) |u - u_d|^(s q - 1)`` and
    ``g_eta = gamma_v (v - v_d)``, node by node.
    '''
    spec.check_alignment(traj)
    g_lambda = spec.gamma_u * signed_power(traj.u - spec.u_d, spec.s * spec.q - 1.0)
    g_eta = spec.gamma_v * (traj.v - spec.v_d)
    return g_lambda, g_eta


def stationarity(
    f: np.ndarray,
    weight: np.ndarray,
    eta: np.ndarray,
    gamma_f: float,
    q: float,
    mask: SubdomainMask
) -> np.ndarray:
    '''
    The pointwise optimality integrand ``gamma_f sgn(f)|f|^(q-1) + w eta``
    on the mask, zero off it, for a frozen state weight ``w``.
    '''
    value = gamma_f * signed_power(np.asarray(f, dtype=float), q - 1.0) + weight * eta
    return np.where(mask.indicator, value, 0.0)


def control_gradient(f: ControlField, traj: Trajectory, adj: AdjointPair, spec: CostSpec) -> ControlField:
    '''
    The gradient of ``f -> J(S(f), f)`` with respect to the control
    pairing ``<., .>_Q``.

    Parameters
    ----------
    f : ControlField
        The control.
    traj : Trajectory
        Its forward run.
    adj : AdjointPair
        The adjoint driven by ``adjoint_sources(traj, spec)``.
    spec : CostSpec
        The cost.

    Returns
    -------
    ControlField
        ``gamma_f sgn(f)|f|^(q-1) + w eta`` on the mask, zero off it and at
        the last node, which no step uses.
    '''
    if adj.time_grid != traj.time_grid or adj.grid != traj.grid:
        raise ArgumentError("The adjoint is not aligned with the trajectory.")
    weight = control_weight(traj, f)
    gradient = stationarity(f.values, weight, adj.eta, spec.gamma_f, spec.q, f.mask)
    gradient[-1] = 0.0
    return f.with_values(gradient)


def cost_directional_derivative(
    traj: Trajectory,
    f: ControlField,
    spec: CostSpec,
    tangent: tuple[np.ndarray, np.ndarray],
    F: ControlField
) -> float:
    '''
    ``J'(f) F`` from the tangent ``(U, V)`` of the flow in direction ``F``:

        <g_lambda, U>_Q + <g_eta, V>_Q + gamma_f <sgn(f)|f|^(q-1), F>_Q
    '''
    grid, tg = traj.grid, traj.time_grid
    big_u, big_v = tangent
    g_lambda, g_eta = adjoint_sources(traj, spec)
    control = spec.gamma_f * signed_power(f.values, spec.q - 1.0)
    return (state_inner(grid, tg, g_lambda, big_u)
            + state_inner(grid, tg, g_eta, big_v)
            + control_inner(grid, tg, control, F.values))


def explicit_control(
    v: np.ndarray,
    eta: np.ndarray,
    gamma_f: float,
    q: float,
    mask: SubdomainMask,
    time_grid: TimeGrid
) -> ControlField:
    '''
    The control solving the pointwise stationarity condition for frozen
    ``v`` and ``eta``:

        f = -sgn(eta) (v |eta| / gamma_f)^(1 / (q - 1))

    on the mask and zero off it.

    Raises
    ------
    ArgumentError
        If gamma_f is not positive or v is negative.
    '''
    require_positive('gamma_f', gamma_f)
    if not (np.isfinite(q) and q > 1.0):
        raise ArgumentError(f"'q' must be > 1, got {q!r}.")
    v = np.asarray(v, dtype=float)
    eta = np.asarray(eta, dtype=float)
    require_nonnegative('v', v)
    magnitude = (np.maximum(v, 0.0) * np.abs(eta) / gamma_f) ** (1.0 / (q - 1.0))
    return ControlField(time_grid, mask, -np.sign(eta) * magnitude)


def project_control(f: ControlField, constraints: ControlConstraints) -> ControlField:
    '''
    Pointwise clamp into the box; identity when unconstrained. Idempotent.
    '''
    if constraints.kind == UNCONSTRAINED:
        return f
    return f.with_values(np.clip(f.values, constraints.lower, constraints.upper))
