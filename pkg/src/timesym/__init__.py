"""Quantum operations, their symmetries, and time reversal.

Canonical data: numpy complex arrays for matrices, Choi matrices on
``H_out (x) H_in`` for linear maps between operator spaces.
"""

from timesym.config import Tolerances, get_tolerances, use_tolerances
from timesym.errors import TimesymError

__all__ = ["Tolerances", "get_tolerances", "use_tolerances", "TimesymError"]
__version__ = "0.1.0"
