import numpy as np
import pytest

from timesym import linalg as la
from timesym import operations as op
from timesym import tsqt
from timesym.errors import (
    Incomplete,
    NotComplete,
    NotNormalizedPOVM,
    NotOrthogonal,
    NotOrthonormal,
    NotProjector,
    NotPSDEffect,
)


def test_ts_classify_examples():
    r = tsqt.ts_classify(op.identity_channel(2))
    assert r.is_ts_operation and r.is_ts_channel
    r = tsqt.ts_classify(op.discard_and_prepare([1, 0], 2))
    assert not r.is_ts_operation and r.defect_out == pytest.approx(0.5)
    assert tsqt.ts_classify(op.uniform_pauli_channel()).is_ts_channel
    half = tsqt.ts_classify(op.identity_channel(2) * 0.5)
    assert half.is_ts_operation and not half.is_ts_channel


def test_von_neumann_instrument():
    inst = tsqt.von_neumann_instrument(np.eye(2))
    assert len(inst) == 2
    assert np.allclose(inst.branches[0].choi, np.diag([1, 0, 0, 0]))
    h = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    assert tsqt.validate_ts_instrument(tsqt.von_neumann_instrument(h.T))
    with pytest.raises(NotOrthonormal):
        tsqt.von_neumann_instrument([[1, 0], [1, 1]])
    with pytest.raises(Incomplete):
        tsqt.von_neumann_instrument([[1, 0, 0], [0, 1, 0]])


def test_luders_instrument():
    inst = tsqt.luders_instrument([np.diag([1, 1, 0]), np.diag([0, 0, 1])])
    assert tsqt.validate_ts_instrument(inst)
    rho = np.full((3, 3), 1 / 3)
    post = inst.branches[0](rho)
    assert np.allclose(post, np.pad(np.full((2, 2), 1 / 3), ((0, 1), (0, 1))))
    assert tsqt.validate_ts_instrument(tsqt.luders_instrument([np.eye(2)]))
    with pytest.raises(NotProjector):
        tsqt.luders_instrument([np.diag([0.5, 1])])
    with pytest.raises(NotOrthogonal):
        tsqt.luders_instrument([np.diag([1, 1]), np.diag([1, 0])])
    with pytest.raises(NotComplete):
        tsqt.luders_instrument([np.diag([1, 0])])


def test_unitary_interspersed_luders_is_time_symmetric():
    p = np.diag([1, 1, 0, 0])
    lud = tsqt.luders_instrument([p, np.eye(4) - p])
    seq = tsqt.unitary_instrument(la.haar_random_unitary(4, 1))
    for inst in (lud, tsqt.unitary_instrument(la.haar_random_unitary(4, 2)), lud):
        seq = tsqt.sequential_instrument(seq, inst)
    assert len(seq) == 4
    assert tsqt.validate_ts_instrument(seq)


def test_deterministic_preparation_is_not_time_symmetric():
    report = tsqt.validate_ts_instrument(op.Instrument((op.discard_and_prepare([1, 0], 2),)))
    assert not report and report.defective_branches == [0]


def test_povm_operations():
    sic = [np.eye(2) / 4 + 0.25 * sum(c * p for c, p in zip(n, op.PAULIS[1:]))
           for n in np.array([[0, 0, 1], [2 * np.sqrt(2) / 3, 0, -1 / 3],
                              [-np.sqrt(2) / 3, np.sqrt(2 / 3), -1 / 3], [-np.sqrt(2) / 3, -np.sqrt(2 / 3), -1 / 3]])]
    ops = tsqt.povm_to_ts_operations(sic)
    assert all(tsqt.ts_classify(q).is_ts_operation for q in ops)
    assert np.allclose(ops[1].choi, sic[1].T)
    assert tsqt.validate_ts_instrument(op.Instrument(tuple(ops)))
    (discard,) = tsqt.povm_to_ts_operations([np.eye(2)])
    assert tsqt.ts_classify(discard).is_ts_channel
    with pytest.raises(NotPSDEffect):
        tsqt.povm_to_ts_operations([2 * np.diag([1, 0]), np.diag([-1, 1])])
    with pytest.raises(NotNormalizedPOVM):
        tsqt.povm_to_ts_operations([np.diag([1, 0])])


def test_max_prep_probability():
    for d in range(2, 6):
        psi = np.zeros(d)
        psi[-1] = 1
        assert tsqt.max_prep_probability(psi, d) == 1 / d
    assert tsqt.max_prep_probability_state(np.eye(3) / 3) == pytest.approx(1.0)
    assert tsqt.max_prep_probability_state(np.diag([0.25, 0.25, 0, 0])) == pytest.approx(0.5)


def test_only_maximally_mixed_preparation_is_deterministic():
    rng = np.random.default_rng(0)
    for d in (2, 3):
        assert tsqt.ts_classify(op.QuantumOperation(1, d, np.eye(d) / d)).is_ts_channel
        for _ in range(20):
            g = la.ginibre(d, d, rng)
            rho = g @ g.conj().T
            rho /= np.trace(rho)
            assert not tsqt.ts_classify(op.QuantumOperation(1, d, rho)).is_ts_channel


@pytest.mark.parametrize("q", [
    op.unitary_channel(la.haar_random_unitary(2, 3)),
    op.identity_channel(2) * 0.5,
    op.choi_from_kraus([np.array([[1, 0], [0, np.sqrt(0.7)]]), np.array([[0, np.sqrt(0.3)], [0, 0]])]),
    op.random_operation(3, 2, 2, 1),
    op.random_operation(2, 3, 1, 2),
    op.null_operation(2, 2),
])
def test_dilation_round_trip(q):
    dil = tsqt.realize_via_dilation(q)
    assert la.is_unitary(dil.u)
    assert np.linalg.norm(dil.realized_choi() - q.choi) <= 1e-7
    assert q.d_in * dil.aux_dims[0] == q.d_out * dil.aux_dims[1]


def test_dilation_shapes():
    dil = tsqt.realize_via_dilation(op.unitary_channel(la.haar_random_unitary(2, 3)))
    assert dil.aux_dims == (1, 1) and np.allclose(dil.p_effect, np.eye(1))
    half = tsqt.realize_via_dilation(op.identity_channel(2) * 0.5)
    assert np.trace(half.p_effect).real == half.aux_dims[1] / 2


def test_twirl():
    _, defect = tsqt.unitary_twirl_fixed_state(3, 5, 0, np.eye(3) / 3)
    assert defect <= 1e-12
    _, defect = tsqt.unitary_twirl_fixed_state(2, 10_000, 0, np.diag([1.0, 0]))
    assert defect <= 0.05
    for seed in range(3):
        small = tsqt.unitary_twirl_fixed_state(2, 100, seed, np.diag([1.0, 0]))[1]
        large = tsqt.unitary_twirl_fixed_state(2, 10_000, seed, np.diag([1.0, 0]))[1]
        assert large < small
