"""Fault localization for small integer programs from a counterexample.

Typical use::

    from locfaults import parse, locfaults
    report = locfaults(parse(source), {"i": 0, "j": 1}, k_max=2)
"""
from __future__ import annotations

from .cfg import build_cfg
from .lang import parse, unroll
from .localize import (BadCounterExample, CounterExampleError, NotACounterExample,
                       PreconditionViolated, locfaults, validate_ce)
from .mcs import Mcs, mcs_enumerate

__all__ = [
    "parse", "unroll", "build_cfg", "locfaults", "validate_ce", "mcs_enumerate", "Mcs",
    "CounterExampleError", "NotACounterExample", "PreconditionViolated", "BadCounterExample",
]

__version__ = "0.1.0"
