'''
Chemocontrol Behaviour-Oriented API
-----------------------------------

This module provides an object-oriented interface for setting up a control
problem and running the functions of the ``core`` module on it.

For a data-oriented interface driven by run configurations, see the
endpoint functions available in the ``api`` module.
'''
from chemocontrol.api.classes.problem import ControlProblem

__all__ = [
    'ControlProblem'
]
