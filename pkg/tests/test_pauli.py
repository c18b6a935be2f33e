from functools import reduce

import numpy as np
import pytest
from hypothesis import given, strategies as st

from compass_sim.pauli import PauliOperator, commutes, conjugate_by_rotation, multiply

I2 = np.eye(2)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.diag([1, -1]).astype(complex)


def dense(p: PauliOperator) -> np.ndarray:
    """Matrix of ``i**phase * prod X^x Z^z``, qubit 0 leftmost in the Kronecker product."""
    factors = [np.linalg.matrix_power(X, p.x >> q & 1) @ np.linalg.matrix_power(Z, p.z >> q & 1)
               for q in range(p.n)]
    return 1j ** p.phase * reduce(np.kron, factors)


def paulis(n):
    return st.builds(lambda x, z, ph: PauliOperator(n, x, z, ph),
                     st.integers(0, 2**n - 1), st.integers(0, 2**n - 1), st.integers(0, 3))


def hermitian(n):
    return st.builds(lambda x, z, s: PauliOperator.from_sparse(
        n, {q: "IXZY"[(x >> q & 1) + 2 * (z >> q & 1)] for q in range(n) if (x | z) >> q & 1}, s),
        st.integers(0, 2**n - 1), st.integers(0, 2**n - 1), st.sampled_from([1, -1]))


@given(paulis(3), paulis(3))
def test_product_matches_matrices(a, b):
    assert np.allclose(dense(multiply(a, b)), dense(a) @ dense(b))


@given(paulis(3), paulis(3))
def test_commutation_matches_matrices(a, b):
    A, B = dense(a), dense(b)
    assert commutes(a, b) == np.allclose(A @ B, B @ A)


@given(paulis(2), hermitian(2), st.integers(-5, 5))
def test_rotation_conjugation_matches_matrices(p, g, k):
    G = dense(g)
    U = np.cos(k * np.pi / 4) * np.eye(4) - 1j * np.sin(k * np.pi / 4) * G
    got = conjugate_by_rotation(p, g, k)
    assert np.allclose(dense(got), U @ dense(p) @ U.conj().T)


@given(hermitian(4))
def test_hermitian_squares_to_identity(p):
    assert p.is_hermitian
    sq = multiply(p, p)
    assert sq.is_identity and sq.sign == 1


def test_y_letter_and_sign():
    y = PauliOperator.from_label("Y")
    assert np.allclose(dense(y), np.array([[0, -1j], [1j, 0]]))
    assert PauliOperator.from_string("-X0Y2", 3).to_string(signed=True) == "-X0Y2"


@pytest.mark.parametrize("text", ["X0X0", "Q1", "X0 Z1"])
def test_bad_strings_rejected(text):
    with pytest.raises(ValueError):
        PauliOperator.from_string(text, 3)


def test_mismatched_sizes_rejected():
    with pytest.raises(ValueError):
        multiply(PauliOperator(2), PauliOperator(3))


def test_weight_and_support():
    p = PauliOperator.from_string("X1Z3Y4", 6)
    assert p.weight == 3 and p.support == [1, 3, 4]
