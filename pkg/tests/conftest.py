import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "timesym", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("timesym")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def choi_by_definition(f, d_in):
    """``sum_ij f(|i><j|) (x) |i><j|`` evaluated literally."""
    blocks = 0
    for i in range(d_in):
        for j in range(d_in):
            e = np.zeros((d_in, d_in), dtype=complex)
            e[i, j] = 1
            blocks = blocks + np.kron(f(e), e)
    return blocks


def kraus_apply(ops, rho):
    return sum(k @ rho @ k.conj().T for k in ops)


def same_up_to_phase(a, b):
    """Frobenius distance between ``a`` and the best phase-rotated ``b``."""
    t = np.vdot(b, a)
    phase = t / abs(t) if abs(t) > 0 else 1
    return float(np.linalg.norm(a - phase * b))
