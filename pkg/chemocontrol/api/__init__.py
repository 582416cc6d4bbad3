from chemocontrol.api import config, endpoints
from chemocontrol.api.classes import problem

from chemocontrol.api.config import (
    RunConfig,
    load_config,
    parse_config,
)
from chemocontrol.api.endpoints import (
    run_diagnose,
    run_forward,
    run_gradcheck,
    run_optimize,
)
from chemocontrol.api.classes import (
    ControlProblem,
)

__all__ = [
    'config',
    'endpoints',
    'problem',

    'RunConfig',
    'load_config',
    'parse_config',

    'run_forward',
    'run_diagnose',
    'run_gradcheck',
    'run_optimize',

    'ControlProblem'
]
