import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from artforge import linalg as la
from artforge.errors import DimensionError, NotDensityMatrixError, NotHermitianError

seeds = st.integers(min_value=0, max_value=2**32 - 1)
dims = st.integers(min_value=2, max_value=4)


def test_kron_examples():
    assert np.allclose(la.kron(np.eye(2), np.eye(2)), np.eye(4))
    assert np.allclose(la.kron(la.PAULI_Z, la.PAULI_Z), np.diag([1, -1, -1, 1]))
    out = la.kron(la.proj(la.ket(2, 0)), np.diag([0.3, 0.7]))
    assert np.allclose(out, np.diag([0.3, 0.7, 0, 0]))


def test_partial_trace_examples():
    assert np.allclose(la.partial_trace(np.eye(4), (2, 2), "A"), 2 * np.eye(2))
    bell = la.phi_plus(2) / 2
    assert np.allclose(la.partial_trace(bell, (2, 2), "B"), np.eye(2) / 2)
    with pytest.raises(DimensionError):
        la.partial_trace(np.eye(5), (2, 2))


def test_min_eigenvalue_examples():
    assert la.min_eigenvalue(np.eye(3)) == pytest.approx(1.0)
    assert la.min_eigenvalue(la.PAULI_Z) == pytest.approx(-1.0)
    assert la.min_eigenvalue(np.diag([0.2, 0.8]) - 0.5 * np.eye(2)) == pytest.approx(-0.3)


def test_orthonormalize_examples():
    b = la.orthonormalize([np.eye(2), 2 * np.eye(2)])
    assert len(b) == 1
    assert np.allclose(b[0], np.eye(2) / np.sqrt(2))
    units = [la.proj(la.ket(2, 0)), la.proj(la.ket(2, 1))]
    b = la.orthonormalize(units)
    assert len(b) == 2 and np.allclose(b.elements, np.array(units))
    b = la.orthonormalize([np.diag([1.0, 0.0]), np.eye(2)])
    assert len(b) == 2
    assert b.residual(np.diag([0.3, -2.0])) < 1e-12
    assert b.residual(la.PAULI_X) == pytest.approx(np.sqrt(2))


def test_complement_examples():
    c = la.complement_basis(la.orthonormalize([np.eye(2)]))
    assert len(c) == 3
    assert all(abs(np.trace(B)) < 1e-12 for B in c)
    diag = la.orthonormalize([la.proj(la.ket(3, j)) for j in range(3)])
    assert len(la.complement_basis(diag)) == 6
    assert len(la.complement_basis(la.full_hermitian_basis(3))) == 0


def test_transpose_examples():
    S = np.array([[1.0, 2.0], [2.0, 3.0]])
    assert np.allclose(la.transpose(S), S)
    assert np.allclose(la.transpose(la.PAULI_Y), -la.PAULI_Y)


def test_validation_errors():
    with pytest.raises(NotHermitianError):
        la.as_hermitian([[0, 1], [0, 0]])
    with pytest.raises(NotDensityMatrixError):
        la.as_density(np.eye(2))
    with pytest.raises(NotDensityMatrixError):
        la.as_density(np.diag([1.5, -0.5]))
    with pytest.raises(DimensionError):
        la.as_hermitian(np.zeros((2, 3)))


def test_d_max_and_support():
    s2 = np.diag([0.5, 0.5])
    assert la.d_max(np.diag([1.0, 0.0]), s2) == pytest.approx(1.0)
    assert la.d_max(s2, np.diag([1.0, 0.0])) == np.inf
    P = la.support_projector(np.diag([0.3, 0.0, 0.7]))
    assert np.allclose(P, np.diag([1, 0, 1]))


@settings(max_examples=30, deadline=None)
@given(seeds, dims, dims)
def test_kron_trace_and_partial_trace(seed, dA, dB):
    rng = np.random.default_rng(seed)
    A, B = la.random_hermitian(dA, rng), la.random_hermitian(dB, rng)
    K = la.kron(A, B)
    assert np.trace(K) == pytest.approx(np.trace(A) * np.trace(B), abs=1e-10)
    assert np.allclose(la.partial_trace(K, (dA, dB), "A"), np.trace(B) * A, atol=1e-10)
    assert np.allclose(la.partial_trace(K, (dA, dB), "B"), np.trace(A) * B, atol=1e-10)
    assert np.allclose(la.transpose(K), la.kron(A.T, B.T))


@settings(max_examples=30, deadline=None)
@given(seeds, dims, st.integers(min_value=1, max_value=6))
def test_orthonormalize_idempotent_and_complement(seed, d, k):
    rng = np.random.default_rng(seed)
    span = [la.random_hermitian(d, rng) for _ in range(k)]
    span.append(span[0] + 2 * span[-1])  # a dependent element is compressed away
    b = la.orthonormalize(span)
    assert len(b) == min(k, d * d)
    assert np.allclose(b.gram(), np.eye(len(b)), atol=1e-10)
    b2 = la.orthonormalize(list(b))
    assert len(b2) == len(b)
    assert all(b.residual(B) < 1e-9 for B in b2)
    c = la.complement_basis(b)
    assert len(b) + len(c) == d * d
    both = la.concat_bases(b, c)
    assert np.allclose(both.gram(), np.eye(d * d), atol=1e-10)


@settings(max_examples=20, deadline=None)
@given(seeds, dims)
def test_random_states_are_states(seed, d):
    rng = np.random.default_rng(seed)
    rho = la.random_density(d, rng)
    la.as_density(rho)
    U = la.random_unitary(d, rng)
    assert np.allclose(U.conj().T @ U, np.eye(d))
    assert np.trace(la.psd_sqrt(rho) @ la.psd_sqrt(rho) - rho) == pytest.approx(0, abs=1e-10)
