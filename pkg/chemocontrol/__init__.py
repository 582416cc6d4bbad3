"""
Chemocontrol simulates a chemotaxis-consumption system with a bilinear
source control on a box, differentiates the discrete scheme exactly through
its tangent and adjoint, and optimizes the control against a tracking cost.
"""

from chemocontrol import api
from chemocontrol.api import (
    endpoints,
    classes
)
from chemocontrol.core import constants
from chemocontrol.core.constants import (
    UNCONSTRAINED,
    BOX,

    ZERO,
    CONSTANT,
    COSINE,
    BUMP,
    FILE,
    GENERATE,
    INITIAL,

    GRAD_TOL,
    MAX_ITERS,
    MIN_STEP,

    GRADIENT,
    FIXED_POINT,

    FORWARD,
    GRADCHECK,
    OPTIMIZE,
    DIAGNOSE,
)
from chemocontrol.core.cost import ControlConstraints, CostSpec
from chemocontrol.core.errors import (
    ChemocontrolError,
    ArgumentError,
    ConfigError,
    CFLError,
    SolverError,
    FieldIOError
)
from chemocontrol.core.forward import (
    ControlField,
    ModelParams,
    TimeGrid,
    Trajectory,
    solve_forward,
    step_admissible_dt,
    step_forward
)
from chemocontrol.core.grid import Grid, ScalarField, SubdomainMask, VectorField
from chemocontrol.core.optimize import OptimizeOptions, fixed_point_control, minimize, projected_gradient_descent
from chemocontrol.core.solvers import SolverOptions
from chemocontrol.api.config import RunConfig, load_config, parse_config
from chemocontrol.api.endpoints import (
    run_forward,
    run_diagnose,
    run_gradcheck,
    run_optimize
)
from chemocontrol.api.classes import ControlProblem

__all__ = [
    "api",
    "classes",
    'endpoints',
    'constants',

    'ControlProblem',
    'RunConfig',
    'load_config',
    'parse_config',

    'run_forward',
    'run_diagnose',
    'run_gradcheck',
    'run_optimize',

    'Grid',
    'ScalarField',
    'VectorField',
    'SubdomainMask',
    'ModelParams',
    'TimeGrid',
    'Trajectory',
    'ControlField',
    'SolverOptions',
    'ControlConstraints',
    'CostSpec',
    'OptimizeOptions',
    'solve_forward',
    'step_forward',
    'step_admissible_dt',
    'projected_gradient_descent',
    'fixed_point_control',
    'minimize',

    'ChemocontrolError',
    'ArgumentError',
    'ConfigError',
    'CFLError',
    'SolverError',
    'FieldIOError',

    "UNCONSTRAINED",
    "BOX",
    "ZERO",
    "CONSTANT",
    "COSINE",
    "BUMP",
    "FILE",
    "GENERATE",
    "INITIAL",
    "GRAD_TOL",
    "MAX_ITERS",
    "MIN_STEP",
    "GRADIENT",
    "FIXED_POINT",
    "FORWARD",
    "GRADCHECK",
    "OPTIMIZE",
    "DIAGNOSE",
]
