"""Property tests over randomly generated maps, states and symmetries."""

import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from timesym import io as tio
from timesym import linalg as la
from timesym import operations as op
from timesym import reversal as rv
from timesym import symmetry as sy
from timesym import tsqt
from timesym.states import fidelity, random_density

from conftest import choi_by_definition, kraus_apply, same_up_to_phase

seeds = st.integers(0, 2**32 - 1)
dims = st.integers(1, 3)
small = st.integers(2, 3)
kinds = st.sampled_from(list(sy.Kind))


@given(seeds, dims, dims, st.integers(1, 4))
def test_choi_kraus_round_trip(seed, d_in, d_out, rank):
    q = op.random_cp_map(d_in, d_out, rank, seed)
    again = op.cp_map_from_kraus(q.kraus())
    assert np.linalg.norm(again.choi - q.choi) <= 1e-8 * max(1, np.linalg.norm(q.choi))


@given(seeds, dims, dims)
def test_choi_matches_definition(seed, d_in, d_out):
    rng = np.random.default_rng(seed)
    ops = [la.ginibre(d_out, d_in, rng) for _ in range(2)]
    assert np.allclose(op.cp_map_from_kraus(ops).choi, choi_by_definition(lambda x: kraus_apply(ops, x), d_in))


@given(seeds, dims, dims)
def test_transpose_and_adjoint_choi_identities(seed, d_in, d_out):
    q = op.random_cp_map(d_in, d_out, 2, seed)
    swap = la.swap_operator(d_out, d_in)
    conj = swap @ q.choi @ swap.T
    assert np.linalg.norm(op.transpose_map(q).choi - conj) <= 1e-9
    assert np.linalg.norm(op.adjoint_map(q).choi - conj.T) <= 1e-9


@given(seeds, dims, dims)
def test_double_transpose_is_choi_transpose_and_involutive(seed, d_in, d_out):
    q = op.random_cp_map(d_in, d_out, 2, seed)
    assert np.linalg.norm(rv.double_transpose(q).choi - q.choi.T) <= 1e-12
    assert np.array_equal(rv.double_transpose(rv.double_transpose(q)).choi, q.choi)


@given(seeds, dims, dims)
def test_fidelity_monotone_under_channels(seed, d, d_out):
    rng = np.random.default_rng(seed)
    j = op.random_cptp(d, d_out, d, rng)
    rho, sigma = random_density(d, rng), random_density(d, rng)
    assert fidelity(op.apply(j, rho), op.apply(j, sigma)) >= fidelity(rho, sigma) - 1e-9


@given(seeds, small)
def test_fidelity_symmetric_and_bounded(seed, d):
    rng = np.random.default_rng(seed)
    rho, sigma = random_density(d, rng), random_density(d, rng)
    f = fidelity(rho, sigma)
    assert 0 <= f <= 1 and abs(f - fidelity(sigma, rho)) <= 1e-9


@given(seeds, small, st.integers(1, 4))
def test_ts_channel_iff_bistochastic(seed, d, rank):
    rng = np.random.default_rng(seed)
    if rng.random() < 0.5:
        w = rng.dirichlet(np.ones(rank))
        q = op.choi_from_kraus([np.sqrt(p) * la.haar_random_unitary(d, rng) for p in w])
    else:
        q = op.random_cptp(d, d, rank, rng)
    assert tsqt.ts_classify(q).is_ts_channel == op.classify(q).bistochastic


@given(seeds, small, st.floats(0.1, 1.0))
def test_theta_closure_on_time_symmetric_operations(seed, d, scale):
    rng = np.random.default_rng(seed)
    w = rng.dirichlet(np.ones(3)) * scale
    q = op.choi_from_kraus([np.sqrt(p) * la.haar_random_unitary(d, rng) for p in w])
    for t in (rv.theta_scaled(q), rv.theta_prime_scaled(q)):
        assert (t.d_in, t.d_out) == (q.d_out, q.d_in)
        assert tsqt.ts_classify(t).is_ts_operation
    assert rv.theta_scaled(rv.theta_scaled(q)).allclose(q)


@given(seeds, small, small, kinds)
def test_build_decompose_round_trip(seed, d_in, d_out, kind):
    rng = np.random.default_rng(seed)
    v, w = la.haar_random_unitary(d_in, rng), la.haar_random_unitary(d_out, rng)
    s1, s2 = sy.decompose_operation_symmetry(sy.build_operation_symmetry(sy.StateSymmetry(kind, v),
                                                                         sy.StateSymmetry(kind, w)))
    assert s1.kind is kind and s2.kind is kind
    assert same_up_to_phase(s1.u, v) <= 1e-7 and same_up_to_phase(s2.u, w) <= 1e-7


@given(seeds, small, small, kinds)
def test_symmetries_map_operations_to_operations(seed, d_in, d_out, kind):
    rng = np.random.default_rng(seed)
    s = sy.build_operation_symmetry(sy.StateSymmetry(kind, la.haar_random_unitary(d_in, rng)),
                                    sy.StateSymmetry(kind, la.haar_random_unitary(d_out, rng)))
    q = op.random_operation(d_in, d_out, 2, rng)
    image = s(q)
    assert isinstance(image, op.QuantumOperation)
    assert op.classify(image).trace_preserving == op.classify(q).trace_preserving


@given(seeds, dims, dims)
def test_serialization_round_trip(seed, d_in, d_out):
    q = op.random_operation(d_in, d_out, 2, seed)
    back = tio.parse_channel(tio.channel_document(q))
    assert np.array_equal(back.choi, q.choi)


@given(seeds, small)
def test_instrument_probabilities_sum_to_one(seed, d):
    rng = np.random.default_rng(seed)
    c = op.random_cptp(d, d, 3, rng)
    inst = op.Instrument(tuple(op.choi_from_kraus([k]) for k in c.kraus()))
    p = op.outcome_probabilities(inst, random_density(d, rng))
    assert np.all(p >= -1e-12) and abs(p.sum() - 1) <= 1e-9


@given(seeds, st.integers(1, 3), st.integers(1, 3))
def test_dilation_reproduces_operation(seed, d_in, d_out):
    q = op.random_operation(d_in, d_out, 2, seed)
    assert np.linalg.norm(tsqt.realize_via_dilation(q).realized_choi() - q.choi) <= 1e-7


@given(seeds, small)
def test_weak_adjoint_always_an_operation(seed, d):
    q = op.random_operation(d, d, 2, seed)
    w = rv.weak_adjoint(q)
    assert isinstance(w, op.QuantumOperation)
    assert rv.weak_adjoint(w).allclose(q / d**2)
