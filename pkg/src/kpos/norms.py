"""Diamond, cb and decomposition norms."""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import NumericalError, ParameterError, ShapeError, SolverError
from .linalg import haar_unitary, operator_norm, trace_norm
from .maps import adjoint, apply, to_superop
from .solver import LinearProgram, SemidefiniteProgram, SolverOptions, lp_solve, sdp_solve

# LPs here are tiny; polish well past the default stopping rule
_LP_OPTS = SolverOptions(gap_tol=1e-12, feas_tol=1e-11)


def hermitian_basis(d):
    """Orthonormal basis of the real space of d x d Hermitian matrices."""
    out = []
    for p in range(d):
        E = np.zeros((d, d), dtype=complex)
        E[p, p] = 1.0
        out.append(E)
    r = 1.0 / np.sqrt(2.0)
    for p in range(d):
        for q in range(p + 1, d):
            E = np.zeros((d, d), dtype=complex)
            E[p, q] = E[q, p] = r
            out.append(E)
            F = np.zeros((d, d), dtype=complex)
            F[p, q] = 1j * r
            F[q, p] = -1j * r
            out.append(F)
    return out


def _hp_program(phi):
    # min mu  s.t.  P - Q = J,  R + Tr_out(P + Q) = mu I,  P, Q, R >= 0, mu >= 0
    n, m = phi.dims
    N = n * m
    J = 0.5 * (phi.choi + phi.choi.conj().T)
    eye_out = np.eye(m)
    cons = []
    for H in hermitian_basis(N):
        cons.append(([H, -H, None, None], float(np.vdot(H, J).real)))
    for H in hermitian_basis(n):
        HI = np.kron(H, eye_out)
        cons.append(([HI, HI, H, [-np.trace(H).real]], 0.0))
    return SemidefiniteProgram(
        blocks=[N, N, n, -1],
        objective=[None, None, None, [1.0]],
        constraints=cons,
        direction="min",
    )


def _general_program(phi):
    # min (mu0 + mu1)/2  s.t.  [[Y0, -J], [-J*, Y1]] >= 0,  Tr_out Y_i <= mu_i I
    n, m = phi.dims
    N = n * m
    J = phi.choi
    eye_out = np.eye(m)
    cons = []
    for p in range(N):
        for q in range(N):
            H = np.zeros((2 * N, 2 * N), dtype=complex)
            H[p, N + q] = H[N + q, p] = 0.5
            cons.append(([H, None, None, None], float(-J[p, q].real)))
            G = np.zeros((2 * N, 2 * N), dtype=complex)
            G[p, N + q] = -0.5j
            G[N + q, p] = 0.5j
            cons.append(([G, None, None, None], float(-J[p, q].imag)))
    for H in hermitian_basis(n):
        HI = np.kron(H, eye_out)
        tr = np.trace(H).real
        top = np.zeros((2 * N, 2 * N), dtype=complex)
        top[:N, :N] = HI
        bot = np.zeros((2 * N, 2 * N), dtype=complex)
        bot[N:, N:] = HI
        cons.append(([top, H, None, [-tr, 0.0]], 0.0))
        cons.append(([bot, None, H, [0.0, -tr]], 0.0))
    return SemidefiniteProgram(
        blocks=[2 * N, n, n, -2],
        objective=[None, None, None, [0.5, 0.5]],
        constraints=cons,
        direction="min",
    )


def diamond_program(phi):
    """SDP whose optimum is the diamond norm of ``phi``."""
    phi = to_superop(phi)
    if phi.is_hermitian_preserving:
        return _hp_program(phi)
    return _general_program(phi)


def trace_lower_bound(phi):
    """``(1/n) ||J||_1`` with n the input dimension; never exceeds the diamond norm."""
    phi = to_superop(phi)
    return trace_norm(phi.choi) / phi.n_in


def diamond_norm(phi, opts=None, full_output=False):
    phi = to_superop(phi)
    if not np.any(phi.choi):
        return (0.0, None) if full_output else 0.0
    res = sdp_solve(diamond_program(phi), opts)
    if not res.ok:
        raise SolverError(f"diamond-norm SDP ended with status {res.status.value}: {res.message}",
                          {"status": res.status.value, "iterations": res.iterations,
                           "gap": res.gap, "primal_residual": res.primal_residual,
                           "dual_residual": res.dual_residual})
    value = res.optimum
    lower = trace_lower_bound(phi)
    if value < lower - 1e-7 * max(1.0, lower):
        raise NumericalError("diamond norm below the Choi trace-norm bound",
                             {"value": value, "trace_lower_bound": lower})
    return (value, res) if full_output else value


def cb_norm(phi, opts=None, full_output=False):
    """cb norm through the diamond norm of the adjoint."""
    return diamond_norm(adjoint(to_superop(phi)), opts, full_output)


def gamma_rows(n, k):
    """Rows ``(coef_s, coef_t)`` with ``coef_s*s + coef_t*t >= 0`` describing the covariant k-PEB cone."""
    return [
        (1, 1),                             # s + t >= 0
        (n * n, 1),                         # -(s+t)/(n^2-1) <= s
        (n * k - n * n, n * k - 1),         # s <= (s+t)(nk-1)/(n^2-1)
    ]


def dec_norm_covariant(n, k, s0, t0, full_output=False):
    """Decomposition norm of the covariant map (s0, t0) out of OMIN_k(M_n).

    Minimizes (s1+t1) + (s2+t2) over splittings (s0, t0) = (s1, t1) - (s2, t2)
    with both pieces in the covariant k-PEB cone. For k = n this is the cb norm.

    Each piece is written as r = s + t >= 0 and s = u - r/(n^2-1) with
    0 <= u <= r nk/(n^2-1), which turns the cone rows into plain bounds and
    keeps every LP variable nonnegative.
    """
    if not 1 <= k <= n:
        raise ParameterError(f"need 1 <= k <= n, got n={n}, k={k}")
    if n == 1:
        value = abs(float(s0) + float(t0))
        return (value, None) if full_output else value
    d = n * n - 1
    w = n * k / d
    # variables (r1, u1, r2, u2)
    A = [
        [-w, 1, 0, 0],
        [0, 0, -w, 1],
        [1, 0, -1, 0],                  # r1 - r2 = s0 + t0
        [-1 / d, 1, 1 / d, -1],         # s1 - s2 = s0
    ]
    lp = LinearProgram(c=[1, 0, 1, 0], A=np.array(A, dtype=float),
                       b=[0.0, 0.0, float(s0) + float(t0), float(s0)],
                       senses=["<=", "<=", "=", "="])
    res = lp_solve(lp, _LP_OPTS)
    if not res.ok:
        raise SolverError(f"decomposition-norm LP ended with status {res.status.value}",
                          {"status": res.status.value, "n": n, "k": k})
    return (res.optimum, res) if full_output else res.optimum


def rk_program(n, k):
    """The two-variable LP over (r, s) whose optimum 2r + 1 equals r_k(M_n)."""
    a = Fraction(1, n * n - 1)
    b = Fraction(n * k - 1, n * n - 1)
    A = [
        [-b, 1],    # s <= b r
        [-a, -1],   # -a r <= s
        [-b, 1],    # s + 1 <= b (r + 1)
        [-a, -1],   # -a (r + 1) <= s + 1
    ]
    rhs = [0, 0, b - 1, 1 + a]
    return LinearProgram(c=[2, 0], A=np.array(A, dtype=float), b=np.array(rhs, dtype=float),
                         lower=[0, -np.inf], upper=[np.inf, np.inf])


def rk_via_lp(n, k):
    res = lp_solve(rk_program(n, k), _LP_OPTS)
    if not res.ok:
        raise SolverError(f"r_k LP ended with status {res.status.value}", {"n": n, "k": k})
    return res.optimum + 1.0


@dataclass
class ProjectionSearchConfig:
    restarts: int = 50
    max_iter: int = 300
    tol: float = 1e-12
    seed: int = 0


def _compressed_norm(Y, V, m):
    # ||(I_m (x) V)^* Y (I_m (x) V)|| with its top singular pair
    W = np.kron(np.eye(m), V)
    C = W.conj().T @ Y @ W
    U, s, Vh = np.linalg.svd(C)
    return s[0], U[:, 0], Vh[0].conj(), W


def omin_norm_estimate(X, n, k, cfg=None):
    """Lower estimate of max_P ||(I_m (x) P)(X (x) I_k)(I_m (x) P)|| over rank-k projections P.

    Riemannian gradient ascent over isometries V: C^k -> C^{nk} (P = V V*)
    with QR retraction and random restarts.
    """
    cfg = cfg or ProjectionSearchConfig()
    X = np.asarray(X, dtype=complex)
    if X.ndim != 2 or X.shape[0] != X.shape[1] or X.shape[0] % n:
        raise ShapeError(f"X must be square with side divisible by n={n}")
    if k >= n:
        return operator_norm(X)
    m = X.shape[0] // n
    nk = n * k
    Y = np.kron(X, np.eye(k))
    rng = np.random.default_rng(cfg.seed)
    best = 0.0
    for _ in range(cfg.restarts):
        Z = rng.standard_normal((nk, k)) + 1j * rng.standard_normal((nk, k))
        V, _ = np.linalg.qr(Z)
        f, u, w, Wm = _compressed_norm(Y, V, m)
        step = 1.0
        for _ in range(cfg.max_iter):
            # gradient of Re(u* C w) in V
            R = (Y @ (Wm @ w)).reshape(m, nk)
            S = (Y.conj().T @ (Wm @ u)).reshape(m, nk)
            G = R.T @ u.reshape(m, k).conj() + S.T @ w.reshape(m, k).conj()
            G = G - V @ (0.5 * (V.conj().T @ G + G.conj().T @ V))
            gnorm = np.linalg.norm(G)
            if gnorm < 1e-12:
                break
            improved = False
            while step > 1e-12:
                Vn, R_ = np.linalg.qr(V + step * G)
                Vn = Vn * np.sign(np.diag(R_).real + (np.diag(R_).real == 0))
                fn, un, wn, Wn = _compressed_norm(Y, Vn, m)
                if fn > f + 1e-4 * step * gnorm ** 2:
                    improved = True
                    break
                step *= 0.5
            if not improved:
                break
            gain = fn - f
            V, f, u, w, Wm = Vn, fn, un, wn, Wn
            step = min(step * 2.0, 1e3)
            if gain <= cfg.tol * max(1.0, f):
                break
        best = max(best, f)
    return min(best, operator_norm(X))


def id_tensor_apply(phi, X):
    """``(id_d (x) phi)(X)`` for X in M_d (x) M_{n_in}."""
    phi = to_superop(phi)
    n = phi.n_in
    X = np.asarray(X, dtype=complex)
    d = X.shape[0] // n
    T = X.reshape(d, n, d, n)
    out = np.einsum("aibj,icjd->acbd", T, phi.blocks())
    return out.reshape(d * phi.n_out, d * phi.n_out)


def sampled_tensor_lower_bound(phi, samples=200, seed=0):
    """max ||(id_n (x) phi)(U)|| over Haar unitaries U (each of operator norm one)."""
    phi = to_superop(phi)
    n = phi.n_in
    rng = np.random.default_rng(seed)
    best = operator_norm(id_tensor_apply(phi, np.eye(n * n)))
    for _ in range(samples):
        U = haar_unitary(n * n, rng)
        best = max(best, operator_norm(id_tensor_apply(phi, U)))
    # flip operator: optimal for the transpose family
    swap = np.eye(n * n).reshape(n, n, n, n).transpose(0, 1, 3, 2).reshape(n * n, n * n)
    best = max(best, operator_norm(id_tensor_apply(phi, swap)))
    return best


def norm_bound_checks(phi, samples=200, seed=0, opts=None):
    """Compare the cb norm with the trace bound and a sampled value of ||id_n (x) phi||."""
    phi = to_superop(phi)
    if phi.n_in != phi.n_out:
        raise ShapeError("norm_bound_checks needs a map M_n -> M_n")
    cb, res = cb_norm(phi, opts, full_output=True)
    diamond = diamond_norm(phi, opts)
    lower = trace_lower_bound(phi)
    sampled = sampled_tensor_lower_bound(phi, samples, seed)
    if sampled > cb + 1e-6:
        raise NumericalError("sampled ||id (x) phi|| exceeds the cb norm",
                             {"sampled": sampled, "cb": cb})
    return {
        "schema": "kpos/1",
        "cb": cb,
        "diamond": diamond,
        "trace_lower_bound": lower,
        "sampled_operator_lower_bound": sampled,
        "solver_gap": None if res is None else res.gap,
    }
