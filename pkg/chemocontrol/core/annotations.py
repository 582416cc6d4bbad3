from typing import Any, Optional, TypedDict


class DiagnosticsRecord(TypedDict):
    '''
    Monitored quantities of one time node of a forward run.

    Keys
    ----
    time
        The node time ``n * dt``.
    mass
        Integral of the cell density.
    energy
        The regularized free energy of the node.
    grad_z_sq
        Dirichlet energy of ``z = sqrt(v + alpha^2)``.
    criterion_cum
        ``||u^s||_{L^q}`` over ``[0, t_n] x Omega`` by the left-endpoint rule,
        so the first node reports 0.
    dissipation, entropy_dissipation, hessian_z_sq, fisher_z
        The unweighted integrals ``int u^s |grad z|^2``,
        ``int |grad (u + 1)^(s/2)|^2``, ``int |Delta z|^2`` and
        ``int |grad z|^4 / z^2`` at this node; the energy inequality weights
        them with constants of its own. The ``*_cum`` keys hold their
        left-endpoint time integrals.
    '''
    time: float
    mass: float
    min_u: float
    max_u: float
    min_v: float
    max_v: float
    energy: float
    grad_z_sq: float
    criterion_cum: float
    min_z: float
    max_z: float
    dissipation: float
    entropy_dissipation: float
    hessian_z_sq: float
    fisher_z: float
    dissipation_cum: float
    entropy_dissipation_cum: float
    hessian_z_sq_cum: float
    fisher_z_cum: float


class IterationRecord(TypedDict):
    '''
    One row of the optimizer history. ``step`` is the accepted step size
    (0 for the initial iterate) and ``criterion`` the regularity monitor of
    the iterate's trajectory.
    '''
    iter: int
    J: float
    residual: float
    step: float
    criterion: float


class CostBreakdown(TypedDict):
    tracking_u: float
    tracking_v: float
    control: float
    total: float


class MultiplierNorms(TypedDict):
    '''L2(Q) and max norms of the adjoint pair.'''
    lambda_l2: float
    lambda_max: float
    eta_l2: float
    eta_max: float


class TaylorRecord(TypedDict):
    epsilon: float
    error: float


class GradcheckReport(TypedDict):
    '''
    Outcome of the derivative checks on one configured instance.

    Keys
    ----
    transpose
        Discrepancies of the duality identity, one per random sample.
    gradient
        Relative errors of central differences against the adjoint
        gradient, one per random direction.
    route_agreement
        Relative differences of tangent-route and adjoint-route directional
        derivatives, one per random direction.
    taylor
        Tangent finite-difference errors for decreasing epsilon, with the
        observed order. The order is None when an error vanishes.
    zero_direction
        True, if the zero direction produced exactly zero tangents.
    passed
        True, if every check met its tolerance.
    '''
    transpose: list[float]
    transpose_max: float
    transpose_tol: float
    gradient: list[float]
    gradient_max: float
    gradient_tol: float
    route_agreement: list[float]
    route_agreement_max: float
    route_tol: float
    taylor: list[TaylorRecord]
    taylor_order: Optional[float]
    zero_direction: bool
    multipliers: MultiplierNorms
    passed: bool
    config: dict[str, Any]


class RunSummary(TypedDict, total=False):
    '''
    Final JSON summary of a command. Only the keys relevant to the command
    are present.
    '''
    command: str
    method: str
    steps: int
    dt: float
    admissible_dt: float
    final_mass: float
    final_min_u: float
    final_min_v: float
    final_max_v: float
    criterion: float
    control_lq: float
    min_z: float
    cost: CostBreakdown
    initial_cost: float
    converged: bool
    reason: str
    iterations: int
    residual: float
    multipliers: MultiplierNorms
    config: dict[str, Any]
