"""Dense complex matrix kernel.

Matrices are plain ``numpy`` arrays of dtype ``complex128`` (or anything
convertible to it). Bipartite operators on C^n (x) C^m use the row-major
index convention ``(i, k) -> i * m + k`` so that ``np.kron`` is the tensor
product.
"""

import json

import numpy as np

from .errors import NumericalError, ShapeError, SizeError

MAX_MATRIX_SIDE = 4096
HERMITIAN_RTOL = 1e-12


def as_matrix(M):
    """Coerce to a finite 2-D complex array."""
    A = np.asarray(M, dtype=complex)
    if A.ndim != 2:
        raise ShapeError(f"expected a 2-D matrix, got shape {A.shape}")
    if A.shape[0] < 1 or A.shape[1] < 1:
        raise ShapeError("matrix dimensions must be positive")
    if not np.all(np.isfinite(A)):
        raise ShapeError("matrix has non-finite entries")
    return A


def is_hermitian(M, rtol=HERMITIAN_RTOL):
    A = np.asarray(M)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        return False
    scale = 1.0 + np.max(np.abs(A), initial=0.0)
    return bool(np.max(np.abs(A - A.conj().T), initial=0.0) <= rtol * scale)


def as_hermitian(M, rtol=HERMITIAN_RTOL):
    A = as_matrix(M)
    if not is_hermitian(A, rtol):
        raise ShapeError("matrix is not Hermitian")
    return A


def kron(A, B, max_side=MAX_MATRIX_SIDE):
    A = as_matrix(A)
    B = as_matrix(B)
    rows = A.shape[0] * B.shape[0]
    cols = A.shape[1] * B.shape[1]
    if max(rows, cols) > max_side:
        raise SizeError(f"kron result {rows}x{cols} exceeds max side {max_side}")
    return np.kron(A, B)


def _split(M, dims):
    n, m = dims
    A = as_matrix(M)
    if A.shape != (n * m, n * m):
        raise ShapeError(f"expected side {n * m} for dims {dims}, got {A.shape}")
    return A.reshape(n, m, n, m)


def partial_trace(M, dims, factor="second"):
    """Trace out the ``first`` or ``second`` tensor factor of ``M``."""
    T = _split(M, dims)
    if factor == "second":
        return np.einsum("ikjk->ij", T)
    if factor == "first":
        return np.einsum("kikj->ij", T)
    raise ValueError(f"factor must be 'first' or 'second', not {factor!r}")


def partial_transpose(M, dims, factor="second"):
    n, m = dims
    T = _split(M, dims)
    if factor == "second":
        T = T.transpose(0, 3, 2, 1)
    elif factor == "first":
        T = T.transpose(2, 1, 0, 3)
    else:
        raise ValueError(f"factor must be 'first' or 'second', not {factor!r}")
    return T.reshape(n * m, n * m)


def eig_hermitian(M):
    """Ascending eigenvalues and unitary eigenvectors of a Hermitian matrix."""
    A = as_hermitian(M)
    A = 0.5 * (A + A.conj().T)
    try:
        w, U = np.linalg.eigh(A)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("Hermitian eigendecomposition failed",
                             {"side": A.shape[0], "cause": str(exc)}) from exc
    return w, U


def singular_values(M):
    A = as_matrix(M)
    try:
        return np.linalg.svd(A, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("SVD failed", {"shape": A.shape, "cause": str(exc)}) from exc


def operator_norm(M):
    return float(singular_values(M)[0])


def trace_norm(M):
    return float(np.sum(singular_values(M)))


def max_entangled(n):
    """Unnormalized maximally entangled vector sum_i e_i (x) e_i."""
    return np.eye(n, dtype=complex).reshape(n * n)


def matrix_unit(n, i, j, m=None):
    E = np.zeros((n, n if m is None else m), dtype=complex)
    E[i, j] = 1.0
    return E


def haar_unitary(n, rng):
    """Haar-random unitary from QR of a complex Ginibre matrix."""
    Z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    Q, R = np.linalg.qr(Z)
    d = np.diag(R)
    return Q * (d / np.abs(d))


def matrix_to_json(M):
    A = as_matrix(M)
    rows, cols = A.shape
    data = [[float(z.real), float(z.imag)] for z in A.reshape(-1)]
    return {"rows": rows, "cols": cols, "data": data}


def matrix_from_json(obj):
    if isinstance(obj, str):
        obj = json.loads(obj)
    try:
        rows, cols, data = int(obj["rows"]), int(obj["cols"]), obj["data"]
    except (KeyError, TypeError) as exc:
        raise ShapeError(f"malformed matrix JSON: {exc}") from exc
    if len(data) != rows * cols:
        raise ShapeError(f"matrix JSON has {len(data)} entries, expected {rows * cols}")
    flat = np.array([complex(re, im) for re, im in data], dtype=complex)
    return as_matrix(flat.reshape(rows, cols))
