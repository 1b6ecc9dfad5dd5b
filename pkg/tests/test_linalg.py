import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from kpos.errors import NumericalError, ShapeError, SizeError
from kpos.linalg import (as_hermitian, as_matrix, eig_hermitian, is_hermitian, kron,
                         matrix_from_json, matrix_to_json, matrix_unit, max_entangled,
                         operator_norm, partial_trace, partial_transpose, trace_norm)
from kpos.maps import tomiyama, transpose_map
from kpos.randgen import gue

X = np.array([[0, 1], [1, 0]], dtype=complex)
SWAP2 = np.eye(4)[[0, 2, 1, 3]]

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def complex_matrix(rows, cols):
    return st.tuples(arrays(float, (rows, cols), elements=finite),
                     arrays(float, (rows, cols), elements=finite)).map(lambda p: p[0] + 1j * p[1])


def test_kron_identity_factor():
    expected = np.zeros((4, 4), dtype=complex)
    expected[:2, :2] = X
    expected[2:, 2:] = X
    assert np.array_equal(kron(np.eye(2), X), expected)


def test_kron_matrix_units():
    assert np.array_equal(kron(matrix_unit(2, 0, 0), matrix_unit(2, 0, 0)), matrix_unit(4, 0, 0))


def test_kron_norm_of_diagonals():
    assert operator_norm(kron(np.diag([2.0]), np.diag([3.0]))) == pytest.approx(6.0)


def test_kron_size_limit():
    with pytest.raises(SizeError):
        kron(np.eye(70), np.eye(70))


def test_as_matrix_rejects_bad_input():
    with pytest.raises(ShapeError):
        as_matrix(np.ones(3))
    with pytest.raises(ShapeError):
        as_matrix([[np.nan]])
    with pytest.raises(ShapeError):
        as_hermitian([[0, 1], [0, 0]])


def test_hermitian_tolerance_is_relative():
    A = np.array([[1e6, 1.0], [1.0 + 1e-7, 0.0]])
    assert is_hermitian(A)
    assert not is_hermitian(np.array([[0, 1.0], [1.0 + 1e-9, 0]]))


def test_partial_trace_examples():
    chi = max_entangled(2)
    assert np.allclose(partial_trace(np.outer(chi, chi.conj()), (2, 2), "second"), np.eye(2))
    assert np.allclose(partial_trace(np.kron(np.eye(2), np.diag([1, 2])), (2, 2)), 3 * np.eye(2))
    assert np.allclose(partial_trace(transpose_map(2).choi, (2, 2), "first"), np.eye(2))
    with pytest.raises(ValueError):
        partial_trace(np.eye(4), (2, 2), "middle")
    with pytest.raises(ShapeError):
        partial_trace(np.eye(5), (2, 2))


def test_eigenvalue_examples():
    assert np.allclose(eig_hermitian(np.diag([1.0, 2.0]))[0], [1, 2])
    assert np.allclose(eig_hermitian(X)[0], [-1, 1])


def test_eig_reconstruction_gue():
    G = gue(16, 3)
    w, U = eig_hermitian(G)
    assert np.max(np.abs(U @ np.diag(w) @ U.conj().T - G)) <= 1e-10


def test_eig_failure_is_wrapped(monkeypatch):
    def boom(A):
        raise np.linalg.LinAlgError("no convergence")

    monkeypatch.setattr(np.linalg, "eigh", boom)
    with pytest.raises(NumericalError) as info:
        eig_hermitian(np.eye(2))
    assert info.value.diagnostics["side"] == 2


def test_norm_examples():
    chi = max_entangled(3)
    assert trace_norm(np.outer(chi, chi)) == pytest.approx(3.0)
    assert operator_norm(X) == pytest.approx(1.0)
    J = tomiyama(3, 2).choi()
    assert trace_norm(J) == pytest.approx(17 / 5, abs=1e-12)
    w = np.sort(np.linalg.eigvalsh(J))
    assert w[0] == pytest.approx(-1 / 5)
    assert np.allclose(w[1:], 2 / 5)


def test_partial_transpose_examples():
    out = partial_transpose(np.kron(np.eye(2), matrix_unit(2, 0, 1)), (2, 2))
    assert np.array_equal(out, np.kron(np.eye(2), matrix_unit(2, 1, 0)))
    chi = max_entangled(2)
    assert np.array_equal(partial_transpose(np.outer(chi, chi), (2, 2)), SWAP2)


def test_json_round_trip_bit_identical():
    rng = np.random.default_rng(0)
    A = rng.standard_normal((3, 5)) + 1j * rng.standard_normal((3, 5))
    text = json.dumps(matrix_to_json(A))
    B = matrix_from_json(text)
    assert B.tobytes() == A.tobytes()
    with pytest.raises(ShapeError):
        matrix_from_json({"rows": 2, "cols": 2, "data": [[0, 0]]})
    with pytest.raises(ShapeError):
        matrix_from_json({"rows": 1})


@settings(max_examples=30, deadline=None)
@given(complex_matrix(2, 2), complex_matrix(2, 2), complex_matrix(2, 2))
def test_kron_associative_and_multiplicative(A, B, C):
    assert np.allclose(kron(kron(A, B), C), kron(A, kron(B, C)), atol=1e-10)
    lhs = operator_norm(kron(A, B))
    assert lhs == pytest.approx(operator_norm(A) * operator_norm(B), rel=1e-10, abs=1e-10)


@settings(max_examples=30, deadline=None)
@given(complex_matrix(3, 3), complex_matrix(2, 2))
def test_partial_trace_of_product(A, B):
    out = partial_trace(kron(A, B), (3, 2), "second")
    assert np.allclose(out, A * np.trace(B), atol=1e-10 * (1 + np.abs(A).max() * np.abs(B).max()))


@settings(max_examples=30, deadline=None)
@given(complex_matrix(4, 4))
def test_partial_transpose_involution(A):
    assert np.array_equal(partial_transpose(partial_transpose(A, (2, 2)), (2, 2)), A)


@settings(max_examples=30, deadline=None)
@given(complex_matrix(4, 4))
def test_eigen_sum_and_norm_order(A):
    H = A + A.conj().T
    w, _ = eig_hermitian(H)
    tr = np.trace(H).real
    assert abs(w.sum() - tr) <= 1e-10 * (1 + np.abs(w).sum())
    assert trace_norm(A) >= operator_norm(A) - 1e-12
