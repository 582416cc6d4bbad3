'''Symmetric positive definite solves shared by every implicit step.'''

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import cg

from chemocontrol.core.constants import (
    DEFAULT_CG_RTOL,
    DEFAULT_LINEAR_RTOL,
    DEFAULT_MAXITER_FACTOR
)
from chemocontrol.core.errors import SolverError
from chemocontrol.core.logging_config import logger
from chemocontrol.core.validation import require_count, require_positive

__all__ = [
    'SolverOptions',
    'solve_spd'
]


@dataclass(frozen=True)
class SolverOptions:
    '''
    Conjugate gradient settings.

    Attributes
    ----------
    rtol : float
        Relative residual tolerance of the forward (state) solves.
    linear_rtol : float
        Relative residual tolerance of tangent and adjoint solves.
    maxiter_factor : int
        Iteration cap as a multiple of the number of unknowns.
    '''
    rtol: float = DEFAULT_CG_RTOL
    linear_rtol: float = DEFAULT_LINEAR_RTOL
    maxiter_factor: int = DEFAULT_MAXITER_FACTOR

    def __post_init__(self) -> None:
        require_positive('rtol', self.rtol)
        require_positive('linear_rtol', self.linear_rtol)
        require_count('maxiter_factor', self.maxiter_factor, minimum=1)
        object.__setattr__(self, 'maxiter_factor', int(self.maxiter_factor))

    def tightened(self) -> 'SolverOptions':
        '''The same options with state solves as tight as linearized ones.'''
        return SolverOptions(
            rtol=min(self.rtol, self.linear_rtol),
            linear_rtol=self.linear_rtol,
            maxiter_factor=self.maxiter_factor)


def solve_spd(
    matrix: sp.spmatrix,
    rhs: np.ndarray,
    rtol: float,
    maxiter_factor: int = DEFAULT_MAXITER_FACTOR,
    x0: Optional[np.ndarray] = None,
    context: Optional[str] = None
) -> np.ndarray:
    '''
    Solve ``matrix @ x = rhs`` by conjugate gradients.

    Parameters
    ----------
    matrix : scipy.sparse matrix
        Symmetric positive definite operator.
    rhs : np.ndarray
        Flat right-hand side.
    rtol : float
        Stop once ``||r|| <= rtol * ||rhs||``.
    maxiter_factor : int
        Iteration cap as a multiple of ``len(rhs)``.
    x0 : np.ndarray, optional
        Initial guess; zero when omitted, which makes the solve
        positively homogeneous in ``rhs``.
    context : str, optional
        Label attached to errors and debug records.

    Returns
    -------
    np.ndarray
        The approximate solution.

    Raises
    ------
    ArgumentError
        If ``maxiter_factor`` is not a positive integer.
    SolverError
        If the tolerance is not met within the iteration cap.
    '''
    require_count('maxiter_factor', maxiter_factor, minimum=1)
    iterations = 0

    def count(_: np.ndarray) -> None:
        nonlocal iterations
        iterations += 1

    x, info = cg(matrix, rhs, x0=x0, rtol=rtol, atol=0.0,
                 maxiter=int(maxiter_factor) * rhs.size, callback=count)
    if info != 0:
        norm = float(np.linalg.norm(rhs)) or 1.0
        residual = float(np.linalg.norm(rhs - matrix @ x)) / norm
        raise SolverError(residual, iterations, context)
    logger.debug("cg %s: %d iterations", context or '', iterations)
    return x
