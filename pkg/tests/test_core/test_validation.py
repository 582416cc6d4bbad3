import math

import numpy as np
import pytest

from chemocontrol.core import validation
from chemocontrol.core.errors import ArgumentError

params = pytest.mark.parametrize


@params(
    'values, expected', [
        ([0.0, 1.0, -2.0], True),
        ([0.0, np.nan], False),
        ([np.inf], False),
        ([], True),
        (3.5, True),
    ]
)
def test_validate_finite(values, expected: bool) -> None:
    assert validation.validate_finite(values) == expected


@params(
    'values, slack, expected', [
        ([0.0, 1.0], 1e-12, True),
        ([-1e-13, 1.0], 1e-12, True),
        ([-1e-11, 1.0], 1e-12, False),
        ([-1e-13], 0.0, False),
        ([], 0.0, True),
    ]
)
def test_validate_nonnegative(values: list[float], slack: float, expected: bool) -> None:
    assert validation.validate_nonnegative(values, slack) == expected


@params(
    'p, expected', [
        (1.0, True),
        (2.5, True),
        (math.inf, True),
        (0.999, False),
        (-math.inf, False),
        (math.nan, False),
    ]
)
def test_validate_exponent(p: float, expected: bool) -> None:
    assert validation.validate_exponent(p) == expected


@params(
    'value, minimum, expected', [
        (3, 1, True),
        (3.0, 1, True),
        (np.int64(2), 1, True),
        (0, 0, True),
        (0, 1, False),
        (2.5, 1, False),
        (True, 1, False),
        (math.inf, 1, False),
        (math.nan, 1, False),
        ('4', 1, False),
    ]
)
def test_validate_count(value: object, minimum: int, expected: bool) -> None:
    assert validation.validate_count(value, minimum) == expected


@params('value', [0.0, -1.0, math.inf, math.nan])
def test_require_positive(value: float) -> None:
    with pytest.raises(ArgumentError, match="'dt'"):
        validation.require_positive('dt', value)


def test_require_shape() -> None:
    validation.require_shape('u', np.zeros((2, 3)), (2, 3))
    with pytest.raises(ArgumentError, match=r"\(3, 2\)"):
        validation.require_shape('u', np.zeros((3, 2)), (2, 3))


def test_require_nonnegative_reports_minimum() -> None:
    with pytest.raises(ArgumentError, match="-0.5"):
        validation.require_nonnegative('v', [1.0, -0.5])
