"""Small dense LP/SDP solvers.

Both entry points share one primal-dual interior-point method (HKM search
direction, Mehrotra predictor-corrector) for the standard-form pair

    primal:  min <C, X>   s.t.  <A_i, X> = b_i,  X >= 0
    dual:    max b.y      s.t.  C - sum_i y_i A_i = S >= 0

where ``X`` is block diagonal. A block is either a complex Hermitian PSD
block or a diagonal (nonnegative orthant) block; following the SDPA
convention a negative block size ``-d`` declares a diagonal block of size d.
"""

import json
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.linalg as sla

from .errors import ShapeError
from .linalg import HERMITIAN_RTOL, is_hermitian, matrix_to_json


class Status(str, Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    MAX_ITERATIONS = "MaxIterations"


@dataclass
class SolverOptions:
    gap_tol: float = 1e-8
    feas_tol: float = 1e-9
    max_iter: int = 200
    infeas_tol: float = 1e-8


@dataclass
class SolverResult:
    status: Status
    optimum: float
    primal: list
    dual: np.ndarray
    gap: float
    iterations: int = 0
    primal_residual: float = math.nan
    dual_residual: float = math.nan
    history: list = field(default_factory=list, repr=False)
    message: str = ""

    @property
    def ok(self):
        return self.status == Status.OPTIMAL

    @property
    def relative_gap(self):
        # stopping-rule scaling, with |p| + |d| ~ 2 |optimum|
        return abs(self.gap) / (1.0 + 2.0 * abs(self.optimum))


@dataclass
class SemidefiniteProgram:
    """Standard-form SDP.

    ``blocks`` holds block sizes (negative = diagonal block). ``objective`` and
    each constraint's coefficient list hold one entry per block: a Hermitian
    matrix for PSD blocks, a vector for diagonal blocks, or ``None`` for zero.
    ``constraints`` is a list of ``(coefficients, rhs)`` pairs.
    """

    blocks: list
    objective: list
    constraints: list
    direction: str = "min"

    def __post_init__(self):
        if self.direction not in ("min", "max"):
            raise ShapeError(f"direction must be 'min' or 'max', not {self.direction!r}")
        if len(self.objective) != len(self.blocks):
            raise ShapeError("objective needs one coefficient per block")
        for coeffs, _ in self.constraints:
            if len(coeffs) != len(self.blocks):
                raise ShapeError("each constraint needs one coefficient per block")

    @property
    def n_constraints(self):
        return len(self.constraints)


@dataclass
class LinearProgram:
    """``direction`` c.x subject to ``A x (senses) b`` and ``lower <= x <= upper``.

    ``senses`` entries are ``"<="``, ``"="`` or ``">="``; bounds may be
    infinite. Defaults: all rows ``"<="``, ``x >= 0``.
    """

    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    senses: list = None
    lower: np.ndarray = None
    upper: np.ndarray = None
    direction: str = "min"

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).reshape(-1)
        nvar = self.c.size
        self.A = np.asarray(self.A, dtype=float).reshape(-1, nvar)
        self.b = np.asarray(self.b, dtype=float).reshape(-1)
        if self.A.shape[0] != self.b.size:
            raise ShapeError(f"A has {self.A.shape[0]} rows but b has {self.b.size}")
        if self.senses is None:
            self.senses = ["<="] * self.b.size
        if len(self.senses) != self.b.size or any(s not in ("<=", "=", ">=") for s in self.senses):
            raise ShapeError("senses must list '<=', '=' or '>=' once per row")
        self.lower = np.zeros(nvar) if self.lower is None else np.broadcast_to(
            np.asarray(self.lower, dtype=float), (nvar,)).copy()
        self.upper = np.full(nvar, np.inf) if self.upper is None else np.broadcast_to(
            np.asarray(self.upper, dtype=float), (nvar,)).copy()
        if self.direction not in ("min", "max"):
            raise ShapeError(f"direction must be 'min' or 'max', not {self.direction!r}")


# ---------------------------------------------------------------------------
# internal dense standard form


class _Block:
    __slots__ = ("dim", "diag", "A", "C")

    def __init__(self, dim, diag, A, C):
        self.dim = dim
        self.diag = diag
        self.A = A  # (m, d) real for diagonal blocks, (m, d*d) complex otherwise
        self.C = C  # (d,) or (d, d)

    def apply(self, X):
        if self.diag:
            return self.A @ X
        return (self.A.conj() @ X.reshape(-1)).real

    def adjoint(self, y):
        if self.diag:
            return y @ self.A
        d = self.dim
        Y = (y @ self.A).reshape(d, d)
        return 0.5 * (Y + Y.conj().T)

    def inner(self, X, S):
        if self.diag:
            return float(X @ S)
        return float(np.vdot(X, S).real)

    def eye(self, scale):
        if self.diag:
            return np.full(self.dim, float(scale))
        return scale * np.eye(self.dim, dtype=complex)


def _coeff(block_size, coeff):
    d = abs(block_size)
    if block_size < 0:
        if coeff is None:
            return np.zeros(d)
        v = np.asarray(coeff)
        if v.ndim == 2:
            v = np.diag(v)
        v = np.real_if_close(v)
        if np.iscomplexobj(v) or v.shape != (d,):
            raise ShapeError(f"diagonal block of size {d} needs a real vector")
        return v.astype(float)
    if coeff is None:
        return np.zeros((d, d), dtype=complex)
    M = np.asarray(coeff, dtype=complex)
    if M.shape != (d, d):
        raise ShapeError(f"block of size {d} got coefficient of shape {M.shape}")
    if not is_hermitian(M, HERMITIAN_RTOL):
        raise ShapeError("SDP coefficient blocks must be Hermitian")
    return 0.5 * (M + M.conj().T)


def _compile(p):
    m = p.n_constraints
    blocks = []
    for bi, size in enumerate(p.blocks):
        if size == 0:
            raise ShapeError("block sizes must be nonzero")
        d = abs(size)
        diag = size < 0
        C = _coeff(size, p.objective[bi])
        if diag:
            A = np.zeros((m, d))
        else:
            A = np.zeros((m, d * d), dtype=complex)
        for i, (coeffs, _) in enumerate(p.constraints):
            A[i] = _coeff(size, coeffs[bi]).reshape(-1)
        if p.direction == "max":
            C = -C
        blocks.append(_Block(d, diag, A, C))
    b = np.array([float(rhs) for _, rhs in p.constraints], dtype=float)
    return blocks, b


def _max_step(X, dX):
    """Largest alpha with X + alpha dX PSD (np.inf if unbounded)."""
    if X.ndim == 1:
        neg = dX < 0
        if not np.any(neg):
            return np.inf
        return float(np.min(-X[neg] / dX[neg]))
    L = np.linalg.cholesky(X)
    T = sla.solve_triangular(L, dX, lower=True)
    T = sla.solve_triangular(L, T.conj().T, lower=True)
    lam = np.linalg.eigvalsh(0.5 * (T + T.conj().T))[0]
    return np.inf if lam >= 0 else float(-1.0 / lam)


def _hinv(S):
    Sinv = np.linalg.inv(S)
    return 0.5 * (Sinv + Sinv.conj().T)


def _solve_spd(M, rhs):
    try:
        c = sla.cho_factor(M, check_finite=False)
        return sla.cho_solve(c, rhs, check_finite=False)
    except np.linalg.LinAlgError:
        reg = 1e-13 * max(1.0, float(np.max(np.abs(np.diag(M)))))
        try:
            c = sla.cho_factor(M + reg * np.eye(M.shape[0]), check_finite=False)
            return sla.cho_solve(c, rhs, check_finite=False)
        except np.linalg.LinAlgError:
            return np.linalg.lstsq(M, rhs, rcond=None)[0]


def _ipm(blocks, b, opts):
    # overflow past the best iterate is caught by the breakdown rule
    with np.errstate(over="ignore", invalid="ignore"):
        return _ipm_loop(blocks, b, opts)


def _ipm_loop(blocks, b, opts):
    m = b.size
    nu = sum(blk.dim for blk in blocks)
    normb = 1.0 + np.linalg.norm(b)
    normC = 1.0 + math.sqrt(sum(np.sum(np.abs(blk.C) ** 2) for blk in blocks))

    X, S = [], []
    for blk in blocks:
        d = blk.dim
        arow = np.linalg.norm(blk.A, axis=1) if m else np.zeros(0)
        xi = max(10.0, math.sqrt(d), d * max(((1 + abs(b)) / (1 + arow)).tolist(), default=1.0))
        eta = max(10.0, math.sqrt(d), max(arow.tolist(), default=0.0),
                  float(np.linalg.norm(blk.C)))
        X.append(blk.eye(xi))
        S.append(blk.eye(eta))
    y = np.zeros(m)

    def A_of(Z):
        out = np.zeros(m)
        for blk, Zb in zip(blocks, Z):
            out += blk.apply(Zb)
        return out

    history = []
    status = Status.MAX_ITERATIONS
    message = "iteration limit reached"
    it = 0
    small_steps = 0
    best = None
    for it in range(opts.max_iter + 1):
        rp = b - A_of(X)
        Rd = [blk.C - blk.adjoint(y) - Sb for blk, Sb in zip(blocks, S)]
        pobj = sum(blk.inner(blk.C, Xb) for blk, Xb in zip(blocks, X))
        dobj = float(b @ y)
        comp = sum(blk.inner(Xb, Sb) for blk, Xb, Sb in zip(blocks, X, S))
        pinf = np.linalg.norm(rp) / normb
        dinf = math.sqrt(sum(np.sum(np.abs(R) ** 2) for R in Rd)) / normC
        scale = 1.0 + abs(pobj) + abs(dobj)
        relgap = max(abs(pobj - dobj), comp) / scale
        history.append((pobj, dobj, pinf, dinf))
        score = max(relgap / opts.gap_tol, pinf / opts.feas_tol, dinf / opts.feas_tol)
        if best is None or score < best["score"]:
            best = {"score": score, "X": [Xb.copy() for Xb in X], "y": y.copy(),
                    "S": [Sb.copy() for Sb in S], "pobj": pobj, "dobj": dobj,
                    "pinf": pinf, "dinf": dinf}
        elif score > 1e4 * best["score"] and best["score"] < 1e6:
            message = "numerical breakdown; returning best iterate"
            break

        if relgap <= opts.gap_tol and pinf <= opts.feas_tol and dinf <= opts.feas_tol:
            status, message = Status.OPTIMAL, "converged"
            break
        # primal infeasibility: y with b.y > 0 and A*(y) + S ~ 0
        if dobj > 0:
            ray = math.sqrt(sum(np.sum(np.abs(blk.adjoint(y) + Sb) ** 2) for blk, Sb in zip(blocks, S)))
            if ray / dobj < opts.infeas_tol and pinf > opts.feas_tol:
                status, message = Status.INFEASIBLE, "primal infeasibility certificate"
                break
        # dual infeasibility: X with <C, X> < 0 and A(X) ~ 0
        if pobj < 0:
            ray = np.linalg.norm(A_of(X))
            if ray / -pobj < opts.infeas_tol and dinf > opts.feas_tol:
                status, message = Status.UNBOUNDED, "dual infeasibility certificate"
                break
        if it == opts.max_iter:
            break

        mu = comp / nu
        Sinv = [1.0 / Sb if blk.diag else _hinv(Sb) for blk, Sb in zip(blocks, S)]
        M = np.zeros((m, m))
        for blk, Xb, Si in zip(blocks, X, Sinv):
            if blk.diag:
                M += (blk.A * (Xb * Si)) @ blk.A.T
            else:
                K = np.kron(Xb, Si.T)
                M += (blk.A.conj() @ K @ blk.A.T).real
        M = 0.5 * (M + M.T)
        XRdSinv = [Xb * R * Si if blk.diag else Xb @ R @ Si
                   for blk, Xb, R, Si in zip(blocks, X, Rd, Sinv)]

        def direction(Rc):
            # dX = Rc S^-1 - X dS S^-1 with Rc the complementarity target
            RcSinv = [R * Si if blk.diag else R @ Si for blk, R, Si in zip(blocks, Rc, Sinv)]
            rhs = rp - A_of(RcSinv) + A_of(XRdSinv)
            dy = _solve_spd(M, rhs)
            dS, dX = [], []
            for blk, R, Xb, Si, RS in zip(blocks, Rd, X, Sinv, RcSinv):
                dSb = R - blk.adjoint(dy)
                if blk.diag:
                    dXb = RS - Xb * dSb * Si
                else:
                    dXb = RS - Xb @ dSb @ Si
                    dXb = 0.5 * (dXb + dXb.conj().T)
                dS.append(dSb)
                dX.append(dXb)
            return dy, dX, dS

        def steps(dX, dS):
            ap = min(_max_step(Xb, d) for Xb, d in zip(X, dX))
            ad = min(_max_step(Sb, d) for Sb, d in zip(S, dS))
            return ap, ad

        # predictor
        Rc = [-(Xb * Sb) if blk.diag else -(Xb @ Sb) for blk, Xb, Sb in zip(blocks, X, S)]
        dy_a, dX_a, dS_a = direction(Rc)
        ap, ad = steps(dX_a, dS_a)
        ap, ad = min(1.0, ap), min(1.0, ad)
        comp_a = sum(blk.inner(Xb + ap * dx, Sb + ad * ds)
                     for blk, Xb, Sb, dx, ds in zip(blocks, X, S, dX_a, dS_a))
        sigma = min(1.0, max(0.0, comp_a / comp)) ** 3 if comp > 0 else 0.0

        # corrector
        Rc = []
        for blk, Xb, Sb, dx, ds in zip(blocks, X, S, dX_a, dS_a):
            if blk.diag:
                Rc.append(sigma * mu - Xb * Sb - dx * ds)
            else:
                Rc.append(sigma * mu * np.eye(blk.dim) - Xb @ Sb - dx @ ds)
        dy, dX, dS = direction(Rc)
        ap, ad = steps(dX, dS)
        gamma = 0.9 + 0.09 * min(ap, ad, 1.0)
        ap, ad = min(1.0, gamma * ap), min(1.0, gamma * ad)
        if max(ap, ad) < 1e-10:
            small_steps += 1
            if small_steps >= 3:
                message = "stalled: step lengths vanished"
                break
        for i, blk in enumerate(blocks):
            X[i] = X[i] + ap * dX[i]
            S[i] = S[i] + ad * dS[i]
            if not blk.diag:
                X[i] = 0.5 * (X[i] + X[i].conj().T)
                S[i] = 0.5 * (S[i] + S[i].conj().T)
        y = y + ad * dy

    if status == Status.MAX_ITERATIONS:
        X, y, S = best["X"], best["y"], best["S"]
        pobj, dobj, pinf, dinf = best["pobj"], best["dobj"], best["pinf"], best["dinf"]
        if best["score"] <= 1.0:
            status = Status.OPTIMAL
        elif best["score"] <= 100.0:
            # one or two decades short of the stopping rule
            status = Status.OPTIMAL if _contract_ok(pobj, dobj, pinf) else status
    return {
        "status": status, "X": X, "y": y, "S": S, "pobj": pobj, "dobj": dobj,
        "pinf": pinf, "dinf": dinf, "iterations": it, "history": history,
        "message": message,
    }


def _contract_ok(pobj, dobj, pinf):
    # SolverResult invariant for an Optimal status
    return abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj)) <= 1e-8 and pinf <= 1e-8


def sdp_solve(p, opts=None):
    """Solve a :class:`SemidefiniteProgram`; see module docstring for the pair."""
    opts = opts or SolverOptions()
    blocks, b = _compile(p)
    r = _ipm(blocks, b, opts)
    sign = -1.0 if p.direction == "max" else 1.0
    if r["status"] == Status.INFEASIBLE:
        optimum = -sign * math.inf
    elif r["status"] == Status.UNBOUNDED:
        optimum = sign * -math.inf
    else:
        optimum = sign * r["pobj"]
    return SolverResult(
        status=r["status"], optimum=optimum, primal=r["X"], dual=r["y"] * sign,
        gap=r["pobj"] - r["dobj"], iterations=r["iterations"],
        primal_residual=r["pinf"], dual_residual=r["dinf"], history=r["history"],
        message=r["message"],
    )


def _lp_standard_form(p):
    """Rewrite bounds and row senses as ``A' z = b', z >= 0``; return the map back."""
    nvar = p.c.size
    cols = []  # each: (column vector over original rows, cost, recover coeff, var index)
    shift = np.zeros(nvar)  # x = shift + sum coef * z
    recover = []  # (var index, z index, coefficient)
    extra_rows = []  # (z index a, z index b, rhs) meaning z_a + z_b = rhs
    zc = []
    zA = []

    def add(col_coef, cost):
        zA.append(col_coef)
        zc.append(cost)
        return len(zc) - 1

    for j in range(nvar):
        lo, hi = p.lower[j], p.upper[j]
        col = p.A[:, j]
        if lo > hi:
            return None
        if np.isfinite(lo):
            shift[j] = lo
            z = add(col, p.c[j])
            recover.append((j, z, 1.0))
            if np.isfinite(hi):
                w = add(np.zeros_like(col), 0.0)
                extra_rows.append((z, w, hi - lo))
        elif np.isfinite(hi):
            shift[j] = hi
            z = add(-col, -p.c[j])
            recover.append((j, z, -1.0))
        else:
            zp = add(col, p.c[j])
            zm = add(-col, -p.c[j])
            recover.append((j, zp, 1.0))
            recover.append((j, zm, -1.0))
    rows_rhs = p.b - p.A @ shift
    for i, sense in enumerate(p.senses):
        if sense == "<=":
            e = np.zeros(p.b.size)
            e[i] = 1.0
            add(e, 0.0)
        elif sense == ">=":
            e = np.zeros(p.b.size)
            e[i] = -1.0
            add(e, 0.0)
    nz = len(zc)
    A = np.zeros((p.b.size + len(extra_rows), nz))
    for k, col in enumerate(zA):
        A[: p.b.size, k] = col
    rhs = list(rows_rhs)
    for r, (za, zb, val) in enumerate(extra_rows):
        A[p.b.size + r, za] = 1.0
        A[p.b.size + r, zb] = 1.0
        rhs.append(val)
    c = np.array(zc)
    const = float(p.c @ shift)
    return A, np.array(rhs), c, shift, recover, const


def lp_solve(p, opts=None):
    """Solve a :class:`LinearProgram` through the diagonal-block IPM."""
    opts = opts or SolverOptions()
    sign = -1.0 if p.direction == "max" else 1.0
    form = _lp_standard_form(p)
    if form is None:
        return SolverResult(Status.INFEASIBLE, sign * math.inf, [], np.zeros(p.b.size), math.nan,
                            message="empty variable bounds")
    A, b, c, shift, recover, const = form
    blk = _Block(c.size, True, A, sign * c)
    r = _ipm([blk], b, opts)
    z = r["X"][0]
    x = shift.copy()
    for j, k, coef in recover:
        x[j] += coef * z[k]
    if r["status"] == Status.INFEASIBLE:
        optimum = sign * math.inf
    elif r["status"] == Status.UNBOUNDED:
        optimum = -sign * math.inf
    else:
        optimum = float(p.c @ x) if r["status"] == Status.OPTIMAL else sign * r["pobj"] + const
    return SolverResult(
        status=r["status"], optimum=optimum, primal=x, dual=sign * r["y"][: p.b.size],
        gap=r["pobj"] - r["dobj"], iterations=r["iterations"],
        primal_residual=r["pinf"], dual_residual=r["dinf"], history=r["history"],
        message=r["message"],
    )


def dump_program(p, path):
    """Write an SDP to JSON (program header plus matrix-format coefficients)."""

    def enc(size, coeff):
        if coeff is None:
            return None
        if size < 0:
            return [float(v) for v in np.real(np.diag(coeff) if np.ndim(coeff) == 2 else coeff)]
        return matrix_to_json(coeff)

    doc = {
        "schema": "kpos/1",
        "kind": "sdp",
        "direction": p.direction,
        "blocks": list(p.blocks),
        "objective": [enc(s, c) for s, c in zip(p.blocks, p.objective)],
        "constraints": [
            {"rhs": float(rhs), "coefficients": [enc(s, c) for s, c in zip(p.blocks, coeffs)]}
            for coeffs, rhs in p.constraints
        ],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)
    return doc
