'''Errors used in the program.'''

from typing import Optional

from chemocontrol.core.constants import (
    CATEGORY_CFL,
    CATEGORY_CONFIG,
    CATEGORY_IO,
    CATEGORY_SOLVER
)


__all__ = [
    "ChemocontrolError",
    "ArgumentError",
    "ConfigError",
    "CFLError",
    "SolverError",
    "FieldIOError"
]


class ChemocontrolError(Exception):
    '''Parent exception for all errors generated by this library.'''
    category: str = CATEGORY_CONFIG


class ArgumentError(ChemocontrolError):
    '''Error signifying that an argument is unacceptable in some way.'''


class ConfigError(ArgumentError):
    '''
    Error signifying that a configuration document cannot be resolved
    into a run.
    '''
    def __init__(self, key: str, message: Optional[str] = None) -> None:
        self.key = key
        msg = f" ({message})" if message else ""
        super().__init__(f"Invalid configuration entry '{key}'{msg}.")


class CFLError(ChemocontrolError):
    '''
    Error signifying that a time step is too large for the explicit
    upwind transport to keep the cell density nonnegative.
    '''
    category = CATEGORY_CFL

    def __init__(self, dt: float, admissible_dt: float) -> None:
        self.dt = dt
        self.admissible_dt = admissible_dt
        super().__init__(
            f"Time step {dt!r} exceeds the admissible step {admissible_dt!r}.")


class SolverError(ChemocontrolError):
    '''Error signifying that an implicit linear solve did not converge.'''
    category = CATEGORY_SOLVER

    def __init__(self, residual: float, iterations: int, context: Optional[str] = None) -> None:
        self.residual = residual
        self.iterations = iterations
        where = f" during {context}" if context else ""
        super().__init__(
            f"Conjugate gradient stopped after {iterations} iterations{where} "
            f"with relative residual {residual:.3e}.")


class FieldIOError(ChemocontrolError):
    '''Error signifying that a field dump cannot be read or written.'''
    category = CATEGORY_IO
