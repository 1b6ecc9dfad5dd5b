"""Linear maps between matrix algebras, stored by their Choi matrices.

Convention: the Choi matrix of ``phi: M_n -> M_m`` is the (n*m)-square matrix
whose (i, j) block of size m is ``phi(E_ij)``, i.e. ``(id (x) phi)(|chi><chi|)``
with the input factor first. With this orientation

    phi(I)      = partial_trace(J, (n, m), "first")
    tr phi(E_ij) = partial_trace(J, (n, m), "second")[i, j]
"""

import json
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ParameterError, ShapeError
from .linalg import (as_matrix, is_hermitian, matrix_from_json, matrix_to_json,
                     max_entangled, partial_trace, operator_norm)


@dataclass(frozen=True, eq=False)
class SuperOp:
    n_in: int
    n_out: int
    choi: np.ndarray

    def __post_init__(self):
        J = as_matrix(self.choi)
        side = self.n_in * self.n_out
        if J.shape != (side, side):
            raise ShapeError(f"choi must be {side}x{side} for {self.n_in}->{self.n_out}, got {J.shape}")
        J = J.copy()
        J.flags.writeable = False
        object.__setattr__(self, "choi", J)

    @property
    def dims(self):
        return (self.n_in, self.n_out)

    @property
    def is_hermitian_preserving(self):
        return is_hermitian(self.choi, 1e-10)

    def blocks(self):
        """Choi matrix as a (n_in, n_out, n_in, n_out) array: ``[i, a, j, b] = phi(E_ij)[a, b]``."""
        return self.choi.reshape(self.n_in, self.n_out, self.n_in, self.n_out)

    def __call__(self, X):
        return apply(self, X)

    def _check_same(self, other):
        if not isinstance(other, SuperOp) or other.dims != self.dims:
            raise ShapeError("maps must have equal dimensions")

    def __add__(self, other):
        self._check_same(other)
        return SuperOp(self.n_in, self.n_out, self.choi + other.choi)

    def __sub__(self, other):
        self._check_same(other)
        return SuperOp(self.n_in, self.n_out, self.choi - other.choi)

    def __mul__(self, c):
        return SuperOp(self.n_in, self.n_out, complex(c) * self.choi)

    __rmul__ = __mul__

    def __neg__(self):
        return SuperOp(self.n_in, self.n_out, -self.choi)

    def allclose(self, other, atol=1e-12):
        return other.dims == self.dims and np.allclose(self.choi, other.choi, rtol=0, atol=atol)

    def to_json(self):
        return {"n_in": self.n_in, "n_out": self.n_out, "choi": matrix_to_json(self.choi)}

    @classmethod
    def from_json(cls, obj):
        if isinstance(obj, str):
            obj = json.loads(obj)
        try:
            return cls(int(obj["n_in"]), int(obj["n_out"]), matrix_from_json(obj["choi"]))
        except (KeyError, TypeError) as exc:
            raise ShapeError(f"malformed SuperOp JSON: {exc}") from exc


@dataclass(frozen=True)
class CovariantMap:
    """``X -> s X + t tr(X)/n I_n``. ``s`` and ``t`` may be Fractions for exact tests."""

    n: int
    s: object
    t: object

    def __post_init__(self):
        if self.n < 1:
            raise ParameterError("n must be positive")

    def choi(self):
        n = self.n
        chi = max_entangled(n)
        return complex(self.s) * np.outer(chi, chi.conj()) + (complex(self.t) / n) * np.eye(n * n)

    def to_superop(self):
        return SuperOp(self.n, self.n, self.choi())

    def __call__(self, X):
        X = as_matrix(X)
        return float(self.s) * X + float(self.t) * np.trace(X) / self.n * np.eye(self.n)

    def compose(self, other):
        """Covariant composition ``self o other`` in closed form."""
        if other.n != self.n:
            raise ShapeError("covariant maps must act on the same M_n")
        s, t, s2, t2 = self.s, self.t, other.s, other.t
        return CovariantMap(self.n, s * s2, s * t2 + t * s2 + t * t2)


def to_superop(phi):
    if isinstance(phi, CovariantMap):
        return phi.to_superop()
    if isinstance(phi, SuperOp):
        return phi
    raise TypeError(f"cannot convert {type(phi).__name__} to SuperOp")


def from_apply(n_in, n_out, f):
    """Choi matrix of ``f`` evaluated on matrix units."""
    J = np.zeros((n_in, n_out, n_in, n_out), dtype=complex)
    for i in range(n_in):
        for j in range(n_in):
            E = np.zeros((n_in, n_in), dtype=complex)
            E[i, j] = 1.0
            out = np.asarray(f(E), dtype=complex)
            if out.shape != (n_out, n_out):
                raise ShapeError(f"map returned shape {out.shape}, expected {(n_out, n_out)}")
            J[i, :, j, :] = out
    return SuperOp(n_in, n_out, J.reshape(n_in * n_out, n_in * n_out))


def apply(phi, X):
    phi = to_superop(phi)
    X = as_matrix(X)
    if X.shape != (phi.n_in, phi.n_in):
        raise ShapeError(f"input must be {phi.n_in}x{phi.n_in}, got {X.shape}")
    return np.einsum("ij,iajb->ab", X, phi.blocks())


def adjoint(phi):
    """Adjoint for the Hilbert-Schmidt pairing ``<A, B> = tr(A* B)``."""
    phi = to_superop(phi)
    J = phi.blocks().conj().transpose(1, 0, 3, 2)
    side = phi.n_in * phi.n_out
    return SuperOp(phi.n_out, phi.n_in, J.reshape(side, side))


def compose(phi, psi):
    """``phi o psi`` (apply ``psi`` first)."""
    phi, psi = to_superop(phi), to_superop(psi)
    if psi.n_out != phi.n_in:
        raise ShapeError(f"cannot compose: inner map outputs M_{psi.n_out}, outer expects M_{phi.n_in}")
    J = np.einsum("iajb,acbd->icjd", psi.blocks(), phi.blocks())
    side = psi.n_in * phi.n_out
    return SuperOp(psi.n_in, phi.n_out, J.reshape(side, side))


def is_unital(phi, tol=1e-9):
    phi = to_superop(phi)
    out = partial_trace(phi.choi, phi.dims, "first")
    return operator_norm(out - np.eye(phi.n_out)) <= tol


def is_trace_preserving(phi, tol=1e-9):
    phi = to_superop(phi)
    marg = partial_trace(phi.choi, phi.dims, "second")
    return operator_norm(marg - np.eye(phi.n_in)) <= tol


def covariant(n, s, t):
    return CovariantMap(n, s, t)


def tomiyama(n, k):
    """Unital k-positive map ``(1 + 1/(nk-1)) tr(X)/n I - X/(nk-1)``."""
    if n < 1 or k < 1 or n * k <= 1:
        raise ParameterError(f"tomiyama map needs nk > 1, got n={n}, k={k}")
    c = Fraction(1, n * k - 1)
    return CovariantMap(n, -c, 1 + c)


def identity_map(n):
    return from_apply(n, n, lambda X: X)


def transpose_map(n):
    return from_apply(n, n, lambda X: X.T)


def project_covariant(phi):
    """Covariant part (Haar twirl) of a map on M_n, in closed form.

    Matches ``<chi|J|chi> = s n^2 + t`` and ``tr J = n (s + t)``.
    """
    if isinstance(phi, CovariantMap):
        return phi
    phi = to_superop(phi)
    if phi.n_in != phi.n_out:
        raise ShapeError("covariant projection needs a map M_n -> M_n")
    n = phi.n_in
    chi = max_entangled(n)
    overlap = np.vdot(chi, phi.choi @ chi)
    tr = np.trace(phi.choi)
    if n == 1:
        s, t = 0.0, tr
    else:
        s = (overlap - tr / n) / (n * n - 1)
        t = tr / n - s
    s, t = complex(s), complex(t)
    if abs(s.imag) <= 1e-12 and abs(t.imag) <= 1e-12:
        s, t = s.real, t.real
    return CovariantMap(n, s, t)


def is_covariant(phi, atol=1e-10):
    phi = to_superop(phi)
    if phi.n_in != phi.n_out:
        return False
    cov = project_covariant(phi)
    return bool(np.max(np.abs(phi.choi - cov.choi())) <= atol)


def parse_map_spec(spec, n=None, k=None):
    """Map from a CLI specifier: tomiyama[:k], transpose, identity, covariant:s,t, file:<path>."""
    if spec.startswith("file:"):
        path = spec[len("file:"):]
        with open(path) as fh:
            return SuperOp.from_json(json.load(fh))
    if n is None:
        raise ParameterError(f"map {spec!r} needs --n")
    if spec.startswith("tomiyama:"):
        try:
            k = int(spec[len("tomiyama:"):])
        except ValueError as exc:
            raise ParameterError(f"bad tomiyama spec {spec!r}; expected tomiyama:k") from exc
        spec = "tomiyama"
    if spec == "tomiyama":
        if k is None:
            raise ParameterError("tomiyama needs --k")
        return tomiyama(n, k)
    if spec == "transpose":
        return transpose_map(n)
    if spec == "identity":
        return identity_map(n)
    if spec.startswith("covariant:"):
        try:
            s, t = (Fraction(v) for v in spec[len("covariant:"):].split(","))
        except ValueError as exc:
            raise ParameterError(f"bad covariant spec {spec!r}; expected covariant:s,t") from exc
        return CovariantMap(n, s, t)
    raise ParameterError(f"unknown map spec {spec!r}")
