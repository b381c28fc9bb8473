import numpy as np
import pytest

from timesym import linalg as la
from timesym import operations as op
from timesym import reversal as rv
from timesym import tsqt
from timesym.errors import (
    NotChannel,
    NotComplementary,
    NotNormalized,
    NotTimeSymmetric,
    SupportMismatch,
)
from timesym.states import random_density


def random_ts_operation(d, seed):
    """Mixture of unitary channels scaled below one: time-symmetric by construction."""
    rng = np.random.default_rng(seed)
    w = rng.dirichlet(np.ones(3)) * rng.uniform(0.3, 1.0)
    ops = [np.sqrt(p) * la.haar_random_unitary(d, rng) for p in w]
    return op.choi_from_kraus(ops)


def test_double_transpose_conjugates_kraus(rng):
    ops = [la.ginibre(3, 2, rng) for _ in range(2)]
    q = op.cp_map_from_kraus(ops)
    dt = rv.double_transpose(q)
    assert np.allclose(dt.choi, q.choi.T)
    assert np.allclose(dt.choi, op.cp_map_from_kraus([k.conj() for k in ops]).choi)
    assert dt.provenance["transform"] == "double-transpose"


def test_double_transpose_keeps_record_type():
    assert isinstance(rv.double_transpose(op.identity_channel(2)), op.QuantumOperation)


def test_theta_fixes_c0():
    c0 = op.uniform_pauli_channel()
    assert rv.theta_scaled(c0).allclose(c0)
    assert rv.theta_prime_scaled(c0).allclose(c0)


def test_theta_rejects_discard_and_prepare():
    with pytest.raises(NotTimeSymmetric) as exc:
        rv.theta_scaled(op.discard_and_prepare([1, 0], 2))
    assert exc.value.details["defect_out"] == pytest.approx(0.5)


def test_theta_is_an_involution_and_stays_time_symmetric():
    for seed in range(10):
        q = random_ts_operation(3, seed)
        t = rv.theta_scaled(q)
        assert tsqt.ts_classify(t).is_ts_operation
        assert tsqt.ts_classify(rv.theta_prime_scaled(q)).is_ts_operation
        assert rv.theta_scaled(t).allclose(q)


def test_theta_on_unitary_channel_is_inverse_unitary():
    u = la.haar_random_unitary(3, 2)
    assert rv.theta_scaled(op.unitary_channel(u)).allclose(op.unitary_channel(u.conj().T))
    assert rv.theta_prime_scaled(op.unitary_channel(u)).allclose(op.unitary_channel(u.T))


def test_theta_of_povm_operation_prepares_scaled_effect():
    p = np.array([[0.7, 0.2j], [-0.2j, 0.3]])
    q = tsqt.povm_to_ts_operations([p, np.eye(2) - p])[0]
    t = rv.theta_scaled(q)
    assert (t.d_in, t.d_out) == (1, 2)
    # the reversed map sends the number 1 to P / d_in
    assert np.allclose(t(np.eye(1)), p / 2)
    assert np.allclose(t.choi, p / 2)


def test_weak_adjoint(rng):
    q = op.discard_and_prepare([1, 0], 2)
    w = rv.weak_adjoint(q)
    assert isinstance(w, op.QuantumOperation)
    r = op.random_operation(3, 3, 2, rng)
    assert rv.weak_adjoint(rv.weak_adjoint(r)).allclose(r / 9)


def test_adjoint_of_discard_and_prepare_is_not_an_operation():
    a = op.adjoint_map(op.discard_and_prepare([1, 0], 2))
    c = op.classify(a)
    assert not c.trace_nonincreasing
    assert c.defects["trace_nonincreasing"] == pytest.approx(1.0)


def test_petz_with_maximally_mixed_references_is_theta():
    for seed in range(5):
        q = random_ts_operation(2, seed)
        mm = np.eye(2) / 2
        assert rv.petz_reversal(q, mm, mm).allclose(rv.theta_scaled(q))
        assert rv.petz_reversal_transpose(q, mm, mm).allclose(rv.theta_prime_scaled(q))


def test_petz_support_mismatch():
    q = op.discard_and_prepare([1, 0], 2)
    with pytest.raises(SupportMismatch):
        rv.petz_reversal(q, np.eye(2) / 2, np.diag([0.0, 1.0]))
    with pytest.raises(NotNormalized):
        rv.petz_reversal(q, np.eye(2) / 4, np.diag([1.0, 0.0]))


def test_crooks_recovers_reference_and_preserves_trace():
    for seed in range(5):
        rng = np.random.default_rng(seed)
        c = op.random_cptp(3, 2, 3, rng)
        rho0 = random_density(3, rng).mat
        r = rv.crooks_reversal(c, rho0)
        assert np.linalg.norm(r(c(rho0)) - rho0) <= 1e-9
        assert op.tp_defect(r) <= 1e-8  # C(rho0) is full rank here


def test_crooks_rejects_non_channel():
    with pytest.raises(NotChannel):
        rv.crooks_reversal(op.identity_channel(2) * 0.5, np.eye(2) / 2)


def test_crooks_operation_dominated_by_channel_reversal():
    rng = np.random.default_rng(5)
    c0 = op.random_cptp(2, 2, 3, rng)
    ops = c0.kraus()
    q = op.choi_from_kraus(ops[:1])
    rho0 = random_density(2, rng).mat
    r = rv.crooks_reversal_operation(q, c0, rho0)
    full = rv.crooks_reversal(c0, rho0)
    assert la.is_psd(full.choi - r.choi)
    with pytest.raises(NotComplementary):
        rv.crooks_reversal_operation(op.identity_channel(2), c0, rho0)
