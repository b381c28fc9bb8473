"""Numeric tolerances shared by every predicate in the package.

The active record lives in a context variable so a caller (the CLI, a test)
can override it for a block of code without touching global state seen by
other threads.
"""

from __future__ import annotations

import contextvars
import os
from contextlib import contextmanager
from dataclasses import dataclass, replace

#: Name of the single environment variable read by :func:`tolerances_from_env`.
ENV_VAR = "TIMESYM_TOL"


@dataclass(frozen=True)
class Tolerances:
    psd_tol: float = 1e-9
    hermiticity_tol: float = 1e-9
    support_cutoff: float = 1e-10
    equality_tol: float = 1e-8
    # second eigenvalue / first eigenvalue below this => rank one
    rank_gap: float = 1e-7


DEFAULT = Tolerances()
_active: contextvars.ContextVar[Tolerances] = contextvars.ContextVar("timesym_tol", default=DEFAULT)


def get_tolerances() -> Tolerances:
    return _active.get()


@contextmanager
def use_tolerances(tol: Tolerances | None = None, **overrides):
    """Temporarily activate ``tol`` (or the current record with ``overrides``)."""
    base = tol if tol is not None else _active.get()
    token = _active.set(replace(base, **overrides))
    try:
        yield _active.get()
    finally:
        _active.reset(token)


def tolerances_from_env(environ=None) -> Tolerances:
    """Tolerances with ``TIMESYM_TOL`` applied to the three comparison tolerances.

    ``support_cutoff`` and ``rank_gap`` are not affected.
    """
    environ = os.environ if environ is None else environ
    raw = environ.get(ENV_VAR)
    if not raw:
        return DEFAULT
    value = float(raw)
    if not value > 0:
        raise ValueError(f"{ENV_VAR} must be a positive number, got {raw!r}")
    return replace(DEFAULT, psd_tol=value, hermiticity_tol=value, equality_tol=value)
