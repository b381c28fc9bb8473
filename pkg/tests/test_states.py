import numpy as np
import pytest

from timesym import states as st
from timesym.errors import InvalidState, NotNormalized, NotUnitVector, ZeroTrace


def test_density_matrix_validation():
    with pytest.raises(InvalidState):
        st.DensityMatrix(np.diag([1.5, 0.0]))
    with pytest.raises(InvalidState):
        st.DensityMatrix(np.diag([1.0, -0.1]))
    with pytest.raises(InvalidState):
        st.DensityMatrix(np.array([[0.5, 1], [0, 0.5]]))
    rho = st.DensityMatrix(np.diag([0.3, 0.2]))
    assert rho.trace == pytest.approx(0.5)
    assert not rho.is_normalized()


def test_density_matrix_is_read_only():
    rho = st.maximally_mixed(2)
    with pytest.raises(ValueError):
        rho.mat[0, 0] = 1


def test_fidelity_examples():
    zero, one = np.diag([1.0, 0]), np.diag([0, 1.0])
    plus = np.full((2, 2), 0.5)
    assert st.fidelity(zero, zero) == pytest.approx(1.0)
    assert st.fidelity(zero, one) == pytest.approx(0.0, abs=1e-12)
    assert st.fidelity(zero, plus) == pytest.approx(0.5)
    # pure-state reduction F = <psi|sigma|psi>
    sigma = st.random_density(2, 3).mat
    assert st.fidelity(zero, sigma) == pytest.approx(sigma[0, 0].real)


def test_fidelity_needs_normalised_states():
    with pytest.raises(NotNormalized):
        st.fidelity(np.diag([0.5, 0]), np.diag([1.0, 0]))


def test_ray_product():
    assert st.ray_product([1, 0], [1j, 0]) == pytest.approx(1.0)
    assert st.ray_product([1, 0], np.array([1, 1]) / np.sqrt(2)) == pytest.approx(2 ** -0.5)
    with pytest.raises(NotUnitVector):
        st.ray_product([1, 1], [1, 0])


def test_condition():
    rho = st.condition(np.diag([0.2, 0.2]))
    assert np.allclose(rho.mat, np.eye(2) / 2)
    with pytest.raises(ZeroTrace):
        st.condition(np.zeros((2, 2)))


def test_purify_reduces_to_state():
    rho = st.random_density(3, 11)
    psi = st.purify(rho)
    full = np.outer(psi, psi.conj()).reshape(3, 3, 3, 3)
    assert np.allclose(np.einsum("ikjk->ij", full), rho.mat)


def test_random_states_seeded():
    assert np.array_equal(st.random_density(3, 5).mat, st.random_density(3, 5).mat)
    assert np.linalg.norm(st.random_pure(4, 1)) == pytest.approx(1.0)
