'''
Testing Notes
-------------

Shared instances come from ``tests/conftest.py``. Derivative tests run with
``SolverOptions().tightened()`` so that solver tolerance does not show up in
finite-difference and transpose comparisons.
'''
