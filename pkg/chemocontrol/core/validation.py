import math

import numpy as np
from numpy.typing import ArrayLike

from chemocontrol.core.constants import NONNEGATIVITY_SLACK
from chemocontrol.core.errors import ArgumentError

__all__ = [
    'validate_finite',
    'validate_nonnegative',
    'validate_exponent',
    'validate_count',
    'require_finite',
    'require_nonnegative',
    'require_positive',
    'require_exponent',
    'require_count',
    'require_shape'
]


def validate_finite(values: ArrayLike) -> bool:
    '''
    Check whether every entry of an array is finite.

    Parameters
    ----------
    values : ArrayLike
        The values to be tested.

    Returns
    -------
    bool
        True, if there is no NaN or infinity among the values.
    '''
    return bool(np.all(np.isfinite(values)))


def validate_nonnegative(values: ArrayLike, slack: float = NONNEGATIVITY_SLACK) -> bool:
    '''
    Check whether an array is nonnegative up to a round-off slack.

    Parameters
    ----------
    values : ArrayLike
        The values to be tested.
    slack : float
        The most negative value still accepted is ``-slack``.

    Returns
    -------
    bool
        True, if no entry is below ``-slack``.
    '''
    values = np.asarray(values)
    return values.size == 0 or bool(values.min() >= -slack)


def validate_exponent(p: float) -> bool:
    '''
    Check whether a Lebesgue exponent is admissible (p >= 1, or infinity).
    '''
    return p == math.inf or (math.isfinite(p) and p >= 1.0)


def validate_count(value: object, minimum: int = 0) -> bool:
    '''
    Check whether a value is a whole number of at least ``minimum``. Floats
    with an integral value count; booleans do not.
    '''
    if isinstance(value, (bool, np.bool_)) or not isinstance(value, (int, float, np.integer, np.floating)):
        return False
    return math.isfinite(value) and float(value).is_integer() and value >= minimum


def require_finite(name: str, values: ArrayLike) -> None:
    '''Raise an ArgumentError if the named values contain NaN or infinity.'''
    if not validate_finite(values):
        raise ArgumentError(f"'{name}' contains non-finite values.")


def require_nonnegative(name: str, values: ArrayLike, slack: float = NONNEGATIVITY_SLACK) -> None:
    '''Raise an ArgumentError if the named values are negative beyond the slack.'''
    if not validate_nonnegative(values, slack):
        raise ArgumentError(
            f"'{name}' has negative entries (min {float(np.min(values))!r}).")


def require_positive(name: str, value: float) -> None:
    '''Raise an ArgumentError if the named scalar is not a positive finite real.'''
    if not (math.isfinite(value) and value > 0.0):
        raise ArgumentError(f"'{name}' must be positive, got {value!r}.")


def require_count(name: str, value: object, minimum: int = 0) -> None:
    '''Raise an ArgumentError if the named value is not an integer of at least ``minimum``.'''
    if not validate_count(value, minimum):
        raise ArgumentError(f"'{name}' must be an integer >= {minimum}, got {value!r}.")


def require_exponent(name: str, p: float) -> None:
    '''Raise an ArgumentError if the named exponent is below 1.'''
    if not validate_exponent(p):
        raise ArgumentError(f"'{name}' must be >= 1 or infinity, got {p!r}.")


def require_shape(name: str, values: np.ndarray, shape: tuple[int, ...]) -> None:
    '''Raise an ArgumentError if the named array does not have the given shape.'''
    if values.shape != shape:
        raise ArgumentError(
            f"'{name}' has shape {values.shape}, expected {shape}.")
