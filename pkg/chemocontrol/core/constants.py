'''Constants used in the program.'''

##############
# Raw Values #
##############
MIN_DIM = 1
MAX_DIM = 3
CRITICAL_Q = 2.5
Q_WARNING_MARGIN = 0.05
NONNEGATIVITY_SLACK = 1e-12
CFL_EPSILON = 1e-30
LOG_BRANCH_GUARD = 1e-12
INF = float('inf')

############
# Defaults #
############
DEFAULT_S = 1.0
DEFAULT_ALPHA = 1e-4
DEFAULT_Q = 3.0

DEFAULT_GAMMA_U = 1.0
DEFAULT_GAMMA_V = 1.0
DEFAULT_GAMMA_F = 1e-4

DEFAULT_CG_RTOL = 1e-10
DEFAULT_LINEAR_RTOL = 1e-13
DEFAULT_MAXITER_FACTOR = 10

DEFAULT_MAX_ITERS = 200
DEFAULT_ARMIJO_C = 1e-4
DEFAULT_BACKTRACK_FACTOR = 0.5
DEFAULT_INITIAL_STEP = 1.0
DEFAULT_GRAD_TOL = 1e-6
DEFAULT_MIN_STEP = 1e-12
DEFAULT_DAMPING = 1.0
BB_STEP_BOUNDS = (1e-10, 1e10)

TRANSPOSE_TOLERANCE = 1e-10
GRADIENT_TOLERANCE = 1e-5
FD_EPSILON = 1e-5
TAYLOR_EPSILONS = (1e-4, 1e-5)
ROUTE_TOLERANCE = 1e-10

DEFAULT_SEED = 0
DEFAULT_DIRECTIONS = 20
DEFAULT_TRANSPOSE_SAMPLES = 5
DEFAULT_BASE_CONTROL = 0.25
DEFAULT_OUTPUT_DIR = 'output'

############
# Keywords #
############

# Constraint kinds
UNCONSTRAINED = 'unconstrained'
BOX = 'box'

# Initial-data and control profiles
ZERO = 'zero'
CONSTANT = 'constant'
COSINE = 'cosine'
BUMP = 'bump'
FILE = 'file'

# Desired-state sources and linearization points
GENERATE = 'generate'
INITIAL = 'initial'

# Optimization methods
GRADIENT = 'gradient'
FIXED_POINT = 'fixed_point'
OPTIMIZE_METHODS = (GRADIENT, FIXED_POINT)

# Termination reasons
GRAD_TOL = 'grad_tol'
MAX_ITERS = 'max_iters'
MIN_STEP = 'min_step'

# Error categories
CATEGORY_CONFIG = 'config'
CATEGORY_CFL = 'cfl'
CATEGORY_SOLVER = 'solver'
CATEGORY_IO = 'io'

EXIT_CODES = {
    CATEGORY_CONFIG: 2,
    CATEGORY_CFL: 3,
    CATEGORY_SOLVER: 4,
    CATEGORY_IO: 5,
}

# Commands
FORWARD = 'forward'
GRADCHECK = 'gradcheck'
OPTIMIZE = 'optimize'
DIAGNOSE = 'diagnose'
COMMANDS = (FORWARD, GRADCHECK, OPTIMIZE, DIAGNOSE)

# Diagnostics record keys (also the CSV header order)
TIME = 'time'
MASS = 'mass'
MIN_U = 'min_u'
MAX_U = 'max_u'
MIN_V = 'min_v'
MAX_V = 'max_v'
ENERGY = 'energy'
GRAD_Z_SQ = 'grad_z_sq'
CRITERION_CUM = 'criterion_cum'
DISSIPATION = 'dissipation'
MIN_Z = 'min_z'
MAX_Z = 'max_z'
ENTROPY_DISSIPATION = 'entropy_dissipation'
HESSIAN_Z_SQ = 'hessian_z_sq'
FISHER_Z = 'fisher_z'
DISSIPATION_CUM = 'dissipation_cum'
ENTROPY_DISSIPATION_CUM = 'entropy_dissipation_cum'
HESSIAN_Z_SQ_CUM = 'hessian_z_sq_cum'
FISHER_Z_CUM = 'fisher_z_cum'

DIAGNOSTICS_COLUMNS = (
    TIME,
    MASS,
    MIN_U,
    MAX_U,
    MIN_V,
    MAX_V,
    ENERGY,
    GRAD_Z_SQ,
    CRITERION_CUM,
)

ENERGY_COLUMNS = (
    TIME,
    ENERGY,
    GRAD_Z_SQ,
    MIN_Z,
    MAX_Z,
    DISSIPATION,
    ENTROPY_DISSIPATION,
    HESSIAN_Z_SQ,
    FISHER_Z,
    DISSIPATION_CUM,
    ENTROPY_DISSIPATION_CUM,
    HESSIAN_Z_SQ_CUM,
    FISHER_Z_CUM,
    CRITERION_CUM,
)

# Optimizer record keys (also the CSV header order)
ITER = 'iter'
COST = 'J'
RESIDUAL = 'residual'
STEP = 'step'
CRITERION = 'criterion'

ITERATION_COLUMNS = (ITER, COST, RESIDUAL, STEP, CRITERION)

# Output file names
DIAGNOSTICS_CSV = 'diagnostics.csv'
ENERGY_CSV = 'energy.csv'
ITERATIONS_CSV = 'iterations.csv'
SUMMARY_JSON = 'summary.json'
GRADCHECK_JSON = 'gradcheck.json'
FIELDS_DIR = 'fields'

# Dump prefixes
U_PREFIX = 'u'
V_PREFIX = 'v'
CONTROL_PREFIX = 'f'
DESIRED_U_PREFIX = 'u_d'
DESIRED_V_PREFIX = 'v_d'
LAMBDA_PREFIX = 'lambda'
ETA_PREFIX = 'eta'

# Field dump format
DUMP_MAGIC = 'CHEMOCONTROL-FIELD 1'
DUMP_SUFFIX = '.field'
DUMP_END = 'end'
DUMP_DTYPE = '<f8'
