"""Membership tests for the k-positive and k-PEB cones.

Covariant maps get exact answers from their (s, t) regions. General maps are
only ever *refuted*: a see-saw search over vectors of Schmidt rank <= k looks
for a negative value of <xi|J|xi>, and a refutation ships that vector.
"""

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from numbers import Rational

import numpy as np

from .errors import DomainError, ParameterError, ShapeError
from .linalg import eig_hermitian, max_entangled
from .maps import CovariantMap, is_covariant, project_covariant, to_superop

REFUTE_TOL = 1e-10
PSD_TOL = 1e-9
SCHMIDT_TOL = 1e-9


class Verdict(str, Enum):
    CERTIFIED = "Certified"
    REFUTED = "Refuted"
    INCONCLUSIVE = "Inconclusive"


class Method(str, Enum):
    COVARIANT_EXACT = "CovariantExact"
    CHOI_PSD = "ChoiPSD"
    SEESAW_WITNESS = "SeeSawWitness"
    SEESAW_EXHAUSTED = "SeeSawExhausted"


@dataclass
class ConeVerdict:
    """Outcome of a cone test.

    For k-positivity a refutation carries a vector ``witness`` of Schmidt rank
    <= k with ``value = <xi|J|xi> < 0``. For k-PEB tests the witness vector
    psi defines a k-block-positive test operator W (``witness_kind`` is
    ``"psd"`` for W = |psi><psi| or ``"block"`` for W = lambda_k(psi) I - |psi><psi|)
    and ``value = tr(J W) < 0``.
    """

    verdict: Verdict
    method: Method
    value: float = None
    witness: np.ndarray = None
    schmidt_rank: int = None
    witness_kind: str = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def certified(self):
        return self.verdict == Verdict.CERTIFIED

    @property
    def refuted(self):
        return self.verdict == Verdict.REFUTED

    def to_json(self):
        doc = {
            "schema": "kpos/1",
            "verdict": self.verdict.value,
            "method": self.method.value,
            "value": self.value,
            "witness": None if self.witness is None else
            [[float(z.real), float(z.imag)] for z in self.witness],
            "schmidt_rank": self.schmidt_rank,
        }
        if self.witness_kind is not None:
            doc["witness_kind"] = self.witness_kind
        return doc


@dataclass
class SeeSawConfig:
    restarts: int = 20
    max_sweeps: int = 200
    tol: float = 1e-10
    seed: int = 0

    def __post_init__(self):
        if self.restarts < 1 or self.max_sweeps < 1 or self.tol <= 0 or self.seed < 0:
            raise ParameterError("see-saw settings must be positive")


# ---------------------------------------------------------------------------
# Schmidt decomposition helpers


def schmidt_coefficients(xi, n, m):
    xi = np.asarray(xi, dtype=complex).reshape(-1)
    if xi.size != n * m:
        raise ShapeError(f"vector of length {xi.size} is not in C^{n} (x) C^{m}")
    return np.linalg.svd(xi.reshape(n, m), compute_uv=False)


def schmidt_rank(xi, n, m, tol=SCHMIDT_TOL):
    c = schmidt_coefficients(xi, n, m)
    scale = max(1.0, float(np.linalg.norm(c)))
    return int(np.sum(c > tol * scale))


def ky_fan_overlap(psi, n, m, k):
    """max |<xi|psi>|^2 over unit xi of Schmidt rank <= k (sum of k largest squared coefficients)."""
    c = schmidt_coefficients(psi, n, m)
    return float(np.sum(c[:k] ** 2))


# ---------------------------------------------------------------------------
# exact covariant regions


def _exact(*vals):
    return all(isinstance(v, (Rational, Fraction)) for v in vals)


def _nonneg(x, scale, exact):
    if exact:
        return x >= 0
    return float(x) >= -1e-12 * scale


def _check_k(n, k):
    if n < 1 or not 1 <= k <= n:
        raise ParameterError(f"need 1 <= k <= n, got n={n}, k={k}")


def covariant_kpeb_contains(n, k, s, t):
    """Whether X -> sX + t tr(X)/n I is k-PEB (Schmidt number of the Choi matrix <= k)."""
    _check_k(n, k)
    exact = _exact(s, t)
    if not exact:
        s, t = float(s), float(t)
    scale = max(1.0, abs(float(s)), abs(float(t))) * n * n
    r = s + t
    if n == 1:
        return _nonneg(r, scale, exact)
    # -(s+t)/(n^2-1) <= s <= (s+t)(nk-1)/(n^2-1), multiplied through by n^2 - 1
    return (_nonneg(r, scale, exact)
            and _nonneg(s * (n * n - 1) + r, scale, exact)
            and _nonneg(r * (n * k - 1) - s * (n * n - 1), scale, exact))


def covariant_kpos_contains(n, k, s, t):
    """Whether X -> sX + t tr(X)/n I is k-positive.

    With J = s|chi><chi| + (t/n) I and |<xi|chi>|^2 ranging over [0, k] on unit
    vectors of Schmidt rank <= k, the minimum of <xi|J|xi> is min(t/n, sk + t/n).
    """
    _check_k(n, k)
    exact = _exact(s, t)
    if not exact:
        s, t = float(s), float(t)
    scale = max(1.0, abs(float(s)), abs(float(t))) * n * k
    if n == 1:
        return _nonneg(s + t, scale, exact)
    return _nonneg(t, scale, exact) and _nonneg(s * n * k + t, scale, exact)


# ---------------------------------------------------------------------------
# see-saw search


@dataclass
class WitnessSearch:
    vector: np.ndarray
    value: float
    schmidt_rank: int
    trace: list


def _smallest(H):
    w, U = np.linalg.eigh(0.5 * (H + H.conj().T))
    return w[0], U[:, 0]


def _see_saw_run(W, n, m, k, cfg, rng):
    V = rng.standard_normal((m, k)) + 1j * rng.standard_normal((m, k))
    V, _ = np.linalg.qr(V)
    eye_n, eye_m = np.eye(n), np.eye(m)
    best = np.inf
    trace = []
    U = None
    for _ in range(cfg.max_sweeps):
        # fix the right factor: minimize over U in an nk-dimensional compression
        B = np.kron(eye_n, V)
        lam, u = _smallest(B.conj().T @ W @ B)
        Q, R = np.linalg.qr(u.reshape(n, k))
        Vt = R @ V.T
        # fix the left factor
        B = np.kron(Q, eye_m)
        lam, vt = _smallest(B.conj().T @ W @ B)
        Vt = vt.reshape(k, m)
        V, R = np.linalg.qr(Vt.T)
        U = Q @ R.T
        trace.append(lam)
        if best - lam <= cfg.tol * max(1.0, abs(lam)):
            best = min(best, lam)
            break
        best = lam
    xi = (U @ V.T).reshape(-1)
    xi = xi / np.linalg.norm(xi)
    return xi, trace


def schmidt_witness_search(W, dims, k, cfg=None, threshold=-REFUTE_TOL, return_best=False):
    """Minimize <xi|W|xi> over unit xi of Schmidt rank <= k by alternating eigenproblems.

    Returns the best :class:`WitnessSearch` if its value is below ``threshold``
    (or always, with ``return_best``); otherwise None.
    """
    cfg = cfg or SeeSawConfig()
    n, m = dims
    W = np.asarray(W, dtype=complex)
    if W.shape != (n * m, n * m):
        raise ShapeError(f"operator must be {n * m}-square for dims {dims}")
    W = 0.5 * (W + W.conj().T)
    if k >= min(n, m):
        w, U = eig_hermitian(W)
        best = WitnessSearch(U[:, 0], float(w[0]), schmidt_rank(U[:, 0], n, m), [float(w[0])])
    else:
        best = None
        seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.restarts)
        for ss in seeds:
            xi, trace = _see_saw_run(W, n, m, k, cfg, np.random.default_rng(ss))
            value = float(np.vdot(xi, W @ xi).real)
            if best is None or value < best.value:
                best = WitnessSearch(xi, value, schmidt_rank(xi, n, m), trace)
    if return_best or best.value < threshold:
        return best
    return None


# ---------------------------------------------------------------------------
# verdicts


def _vector_verdict(J, xi, dims, method, **diag):
    xi = xi / np.linalg.norm(xi)
    value = float(np.vdot(xi, J @ xi).real)
    return ConeVerdict(Verdict.REFUTED, method, value, xi, schmidt_rank(xi, *dims), "vector", diag)


def _covariant_kpos_verdict(cov, k):
    n = cov.n
    J = cov.choi()
    kk = min(k, n)
    if covariant_kpos_contains(n, kk, cov.s, cov.t):
        return ConeVerdict(Verdict.CERTIFIED, Method.COVARIANT_EXACT)
    xi = np.zeros(n * n, dtype=complex)
    exact = _exact(cov.s, cov.t)
    t_ok = _nonneg(cov.t if exact else float(cov.t), max(1.0, abs(float(cov.t))), exact)
    if n == 1:
        xi[0] = 1.0
    elif not t_ok:
        xi[1] = 1.0                               # e_0 (x) e_1 is orthogonal to chi: value t/n
    else:
        for a in range(kk):
            xi[a * n + a] = 1.0                   # overlap k with chi: value sk + t/n
    return _vector_verdict(J, xi, (n, n), Method.COVARIANT_EXACT)


def _hermitian_choi(phi):
    phi = to_superop(phi)
    if not phi.is_hermitian_preserving:
        raise DomainError("cone tests need a Hermitian-preserving map")
    J = 0.5 * (phi.choi + phi.choi.conj().T)
    return phi, J


def is_k_positive(phi, k, cfg=None, use_covariance=True):
    """Test k-positivity; see-saw results are refutations only."""
    if k < 1:
        raise ParameterError("k must be positive")
    if isinstance(phi, CovariantMap):
        return _covariant_kpos_verdict(phi, k)
    phi, J = _hermitian_choi(phi)
    dims = phi.dims
    if k >= min(dims):
        w, U = eig_hermitian(J)
        if w[0] >= -PSD_TOL:
            return ConeVerdict(Verdict.CERTIFIED, Method.CHOI_PSD, float(w[0]))
        return _vector_verdict(J, U[:, 0], dims, Method.CHOI_PSD)
    if use_covariance and is_covariant(phi):
        return _covariant_kpos_verdict(project_covariant(phi), k)
    cfg = cfg or SeeSawConfig()
    found = schmidt_witness_search(J, dims, k, cfg, return_best=True)
    if found.value < -REFUTE_TOL and found.schmidt_rank <= k:
        return _vector_verdict(J, found.vector, dims, Method.SEESAW_WITNESS,
                               sweeps=len(found.trace))
    return ConeVerdict(Verdict.INCONCLUSIVE, Method.SEESAW_EXHAUSTED, found.value,
                       diagnostics={"restarts": cfg.restarts, "best_value": found.value})


def _test_verdict(J, psi, dims, k, kind, method, **diag):
    psi = psi / np.linalg.norm(psi)
    overlap = float(np.vdot(psi, J @ psi).real)
    if kind == "psd":
        value = overlap
    else:
        value = ky_fan_overlap(psi, *dims, k) * float(np.trace(J).real) - overlap
    return ConeVerdict(Verdict.REFUTED, method, value, psi, schmidt_rank(psi, *dims), kind, diag)


def kpeb_test_value(J, psi, dims, k, kind):
    """tr(J W) for the k-block-positive operator W defined by ``psi`` and ``kind``."""
    return _test_verdict(np.asarray(J), np.asarray(psi, dtype=complex), dims, k, kind,
                         Method.SEESAW_WITNESS).value


def _covariant_kpeb_verdict(cov, k):
    n = cov.n
    kk = min(k, n)
    if covariant_kpeb_contains(n, kk, cov.s, cov.t):
        return ConeVerdict(Verdict.CERTIFIED, Method.COVARIANT_EXACT)
    J = cov.choi()
    psi = max_entangled(n) / np.sqrt(n)
    s, t = cov.s, cov.t
    exact = _exact(s, t)
    if n == 1 or not _nonneg(s * n * n + t, max(1.0, abs(float(s)), abs(float(t))) * n * n, exact):
        return _test_verdict(J, psi, (n, n), kk, "psd", Method.COVARIANT_EXACT)
    return _test_verdict(J, psi, (n, n), kk, "block", Method.COVARIANT_EXACT)


def is_k_peb(phi, k, cfg=None, use_covariance=True, candidates=8):
    """Test whether the Choi matrix has Schmidt number <= k; general maps are refuted or inconclusive."""
    if k < 1:
        raise ParameterError("k must be positive")
    if isinstance(phi, CovariantMap):
        return _covariant_kpeb_verdict(phi, k)
    phi, J = _hermitian_choi(phi)
    dims = phi.dims
    if use_covariance and is_covariant(phi):
        return _covariant_kpeb_verdict(project_covariant(phi), k)
    w, U = eig_hermitian(J)
    if w[0] < -PSD_TOL:
        return _test_verdict(J, U[:, 0], dims, k, "psd", Method.CHOI_PSD)
    if k >= min(dims):
        return ConeVerdict(Verdict.CERTIFIED, Method.CHOI_PSD, float(w[0]))
    cfg = cfg or SeeSawConfig()
    pool = []
    if dims[0] == dims[1]:
        pool.append(max_entangled(dims[0]))
    pool += [U[:, -1 - j] for j in range(min(candidates, U.shape[1]))]
    rng = np.random.default_rng(cfg.seed)
    best = None
    for psi in pool:
        psi = _refine_kpeb_candidate(J, psi, dims, k, rng)
        v = _test_verdict(J, psi, dims, k, "block", Method.SEESAW_WITNESS)
        if best is None or v.value < best.value:
            best = v
    if best.value < -REFUTE_TOL:
        return best
    return ConeVerdict(Verdict.INCONCLUSIVE, Method.SEESAW_EXHAUSTED, best.value,
                       diagnostics={"candidates": len(pool), "best_value": best.value})


def _refine_kpeb_candidate(J, psi, dims, k, rng, steps=50):
    # greedy local search on psi for tr(J (lambda_k(psi) I - |psi><psi|))
    trJ = float(np.trace(J).real)

    def f(x):
        x = x / np.linalg.norm(x)
        return ky_fan_overlap(x, *dims, k) * trJ - float(np.vdot(x, J @ x).real)

    psi = psi / np.linalg.norm(psi)
    cur = f(psi)
    scale = 0.3
    for _ in range(steps):
        trial = psi + scale * (rng.standard_normal(psi.size) + 1j * rng.standard_normal(psi.size)) / np.sqrt(2 * psi.size)
        trial = trial / np.linalg.norm(trial)
        val = f(trial)
        if val < cur:
            psi, cur = trial, val
        else:
            scale *= 0.9
    return psi
