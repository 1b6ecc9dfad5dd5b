"""Seeded random ensembles and Monte-Carlo estimators.

Every sampler takes an integer seed; per-sample streams are children of
``np.random.SeedSequence(seed)`` so sample i is the same whatever the total
sample count.
"""

import csv
import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .cones import SeeSawConfig, is_k_positive, schmidt_witness_search
from .errors import ParameterError, SamplingError
from .linalg import eig_hermitian, haar_unitary, partial_trace
from .maps import SuperOp, adjoint, covariant, from_apply, identity_map, tomiyama, transpose_map
from .norms import diamond_norm

THREADS_ENV = "KPOS_THREADS"


def _rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _child_seeds(seed, count):
    return np.random.SeedSequence(seed).spawn(count)


def _int_seed(ss):
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def gue(p, seed):
    """p x p GUE matrix: N(0,1) diagonal, (g + ih)/sqrt(2) off the diagonal."""
    if p < 1:
        raise ParameterError("p must be positive")
    rng = _rng(seed)
    G = np.zeros((p, p), dtype=complex)
    G[np.diag_indices(p)] = rng.standard_normal(p)
    iu = np.triu_indices(p, 1)
    re = rng.standard_normal(iu[0].size)
    im = rng.standard_normal(iu[0].size)
    G[iu] = (re + 1j * im) / math.sqrt(2.0)
    G[(iu[1], iu[0])] = np.conj(G[iu])
    return G


def mean_width_trace_ball(p, samples, seed):
    """Monte-Carlo E||G|| for p x p GUE G (the Gaussian width of the trace-norm ball)."""
    if samples < 2:
        raise ParameterError("need at least two samples")
    rng = _rng(seed)
    vals = np.empty(samples)
    for i in range(samples):
        w = np.linalg.eigvalsh(gue(p, rng))
        vals[i] = max(-w[0], w[-1])
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(samples))


# ---------------------------------------------------------------------------
# width of the diamond-norm unit ball


def _unit_family(n, rng, n_unitaries=4):
    maps = [("identity", identity_map(n)), ("transpose", transpose_map(n))]
    if n > 1:
        for k in range(1, n):
            maps.append((f"tomiyama-adjoint({n},{k})", adjoint(tomiyama(n, k).to_superop())))
    for s, t in [(1, 1), (1, -1), (-1, 1), (2, -1), (-1, 3), (1, -3), (0, 1)]:
        maps.append((f"covariant({s},{t})", covariant(n, s, t).to_superop()))
    for i in range(n_unitaries):
        U = haar_unitary(n, rng)
        maps.append((f"unitary-{i}", from_apply(n, n, lambda X, U=U: U @ X @ U.conj().T)))
    out = []
    for name, phi in maps:
        d = diamond_norm(phi)
        out.append((name, phi.choi / d))
    return out


def diamond_ball_width_check(n, samples, seed):
    """Lower estimate of the Gaussian width of the diamond-norm unit ball.

    For each Gaussian direction G (a GUE matrix on C^n (x) C^n, identified with
    a superoperator through its Choi matrix) take the largest |<G, J>| over a
    fixed family of unit-diamond-norm maps plus the map with Choi matrix
    sign(G), rescaled to diamond norm one.
    """
    if n > 4:
        raise ParameterError("diamond_ball_width_check is limited to n <= 4")
    seeds = _child_seeds(seed, samples + 1)
    family = _unit_family(n, np.random.default_rng(seeds[0]))
    radius = max(float(np.linalg.norm(J)) for _, J in family)
    values, cs_ok = [], True
    for ss in seeds[1:]:
        G = gue(n * n, np.random.default_rng(ss))
        w, U = eig_hermitian(G)
        S = (U * np.sign(w)) @ U.conj().T
        d = diamond_norm(SuperOp(n, n, S))
        cands = [(S / d)] + [J for _, J in family]
        radius = max(radius, float(np.linalg.norm(S / d)))
        best = max(abs(float(np.vdot(G, J).real)) for J in cands)
        cs_ok &= best <= float(np.linalg.norm(G)) * n + 1e-9
        values.append(best)
    values = np.array(values)
    est = float(values.mean())
    se = float(values.std(ddof=1) / math.sqrt(samples)) if samples > 1 else math.inf
    bound = 2.0 * n * n
    return {
        "schema": "kpos/1",
        "n": n,
        "samples": samples,
        "seed": seed,
        "lower_estimate": est,
        "standard_error": se,
        "upper_bound": bound,
        "bound_holds": bool(est <= bound + 3 * se),
        "cauchy_schwarz_ok": bool(cs_ok),
        "max_frobenius_radius": radius,
        "family": [name for name, _ in family],
    }


# ---------------------------------------------------------------------------
# random k-positive trace-preserving maps


class RandomMap(NamedTuple):
    superop: SuperOp
    flag: str
    epsilon: float


def _traceless_direction(n, rng):
    E = gue(n * n, rng)
    marg = partial_trace(E, (n, n), "second")
    return E - np.kron(marg, np.eye(n)) / n


def random_k_positive_tp_map(n, k, seed, cfg=None):
    """Trace-preserving map with Choi I/n + eps E pushed to the k-positive boundary.

    E is a GUE direction with Tr_out E = 0. Since <xi|I/n + eps E|xi> = 1/n + eps <xi|E|xi>
    on unit vectors, the boundary sits at eps = 1/(n |min_xi <xi|E|xi>|); the
    minimum over Schmidt rank <= k comes from the see-saw (exact for k = n).
    The candidate is then re-tested and bisected down if a witness appears.
    """
    if not 1 <= k <= n:
        raise ParameterError(f"need 1 <= k <= n, got n={n}, k={k}")
    cfg = cfg or SeeSawConfig()
    rng = _rng(seed)
    E = _traceless_direction(n, rng)
    eye = np.eye(n * n) / n

    def choi(eps):
        return SuperOp(n, n, eye + eps * E)

    if k >= n:
        lam = eig_hermitian(E)[0][0]
        eps = (1.0 - 1e-9) / (n * abs(lam))
        return RandomMap(choi(eps), "certified-choi", eps)

    found = schmidt_witness_search(E, (n, n), k, cfg, return_best=True)
    if found.value >= 0:
        raise SamplingError("direction has no negative Schmidt-rank-k value", {"value": found.value})
    hi = 1.0 / (n * abs(found.value))
    check = SeeSawConfig(cfg.restarts, cfg.max_sweeps, cfg.tol, cfg.seed + 1)
    eps = hi * (1.0 - 1e-7)
    if not is_k_positive(choi(eps), k, check, use_covariance=False).refuted:
        return RandomMap(choi(eps), "heuristic", eps)
    lo = 0.0
    for _ in range(200):
        if hi - lo <= 1e-6 * max(lo, 1e-300):
            return RandomMap(choi(lo), "heuristic", lo)
        mid = 0.5 * (lo + hi)
        if is_k_positive(choi(mid), k, check, use_covariance=False).refuted:
            hi = mid
        else:
            lo = mid
    raise SamplingError("epsilon bisection did not converge", {"lo": lo, "hi": hi})


# ---------------------------------------------------------------------------
# empirical lower bounds on d_k(M_n)


@dataclass
class SampleRecord:
    index: int
    source: str
    seed: int
    epsilon: float
    diamond: float
    flag: str
    refuted: bool = False


@dataclass
class SampleReport:
    n: int
    k: int
    samples: int
    seed: int
    best: float
    best_map: SuperOp
    best_source: str
    records: list = field(default_factory=list)
    discarded: int = 0
    truncated: bool = False

    def values(self, flag_prefix=None):
        return [r.diamond for r in self.records
                if not r.refuted and (flag_prefix is None or r.flag.startswith(flag_prefix))]

    @property
    def certified_best(self):
        return max(self.values("certified"), default=None)

    @property
    def heuristic_best(self):
        return max(self.values("heuristic"), default=None)

    def running_best(self):
        """Best value after each random sample, named candidates included from the start."""
        named = [r.diamond for r in self.records if r.index < 0 and not r.refuted]
        cur = max(named, default=-math.inf)
        out = []
        for r in sorted((r for r in self.records if r.index >= 0), key=lambda r: r.index):
            if not r.refuted:
                cur = max(cur, r.diamond)
            out.append(cur)
        return out

    def summary(self):
        v = np.array(self.values())
        se = float(v.std(ddof=1) / math.sqrt(v.size)) if v.size > 1 else None
        return {"mean": float(v.mean()), "max": float(v.max()), "standard_error": se}

    def to_json(self):
        return {
            "schema": "kpos/1",
            "n": self.n,
            "k": self.k,
            "samples": self.samples,
            "seed": self.seed,
            "best": self.best,
            "best_source": self.best_source,
            "best_map": self.best_map.to_json(),
            "certified_best": self.certified_best,
            "heuristic_best": self.heuristic_best,
            "discarded": self.discarded,
            "truncated": self.truncated,
            "summary": self.summary(),
            "sqrt_n_over_k": math.sqrt(self.n / self.k),
            "records": [vars(r) for r in self.records],
        }

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["index", "source", "seed", "epsilon", "diamond", "flag", "refuted"])
        for r in self.records:
            w.writerow([r.index, r.source, r.seed, f"{r.epsilon:.9g}", f"{r.diamond:.9g}",
                        r.flag, int(r.refuted)])
        return buf.getvalue()


def _named_candidates(n, k):
    out = []
    if n * k > 1:
        out.append(("tomiyama-adjoint", adjoint(tomiyama(n, k).to_superop()), "certified-covariant"))
    if k == 1:
        out.append(("transpose-adjoint", adjoint(transpose_map(n)), "certified-named"))
    return out


def _one_sample(i, ss, n, k, cfg):
    s = _int_seed(ss)
    sub = SeeSawConfig(cfg.restarts, cfg.max_sweeps, cfg.tol, s % (2 ** 32))
    phi, flag, eps = random_k_positive_tp_map(n, k, np.random.default_rng(ss), sub)
    refuted = False
    if flag == "heuristic":
        check = SeeSawConfig(cfg.restarts, cfg.max_sweeps, cfg.tol, (s + 7) % (2 ** 32))
        refuted = is_k_positive(phi, k, check, use_covariance=False).refuted
    value = diamond_norm(phi)
    return SampleRecord(i, "random", s, eps, value, flag, refuted), phi


def empirical_d_lower(n, k, samples, seed, cfg=None, threads=None, max_seconds=None):
    """Largest diamond norm over random k-positive TP maps and named candidates.

    Each value is a lower bound on d_k(M_n) (via the adjoint) as long as the
    map really is k-positive; random maps carry a ``heuristic`` flag because
    membership is only checked by witness search.
    """
    import time

    if not 1 <= k <= n:
        raise ParameterError(f"need 1 <= k <= n, got n={n}, k={k}")
    cfg = cfg or SeeSawConfig()
    records, maps = [], {}
    for j, (name, phi, flag) in enumerate(_named_candidates(n, k)):
        records.append(SampleRecord(-1 - j, name, -1, 0.0, diamond_norm(phi), flag))
        maps[-1 - j] = phi
    seeds = _child_seeds(seed, samples)
    threads = threads or int(os.environ.get(THREADS_ENV, "1") or 1)
    start = time.monotonic()
    truncated = False

    def run(i):
        return _one_sample(i, seeds[i], n, k, cfg)

    if threads > 1 and max_seconds is None:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(run, range(samples)))
    else:
        results = []
        for i in range(samples):
            if max_seconds is not None and time.monotonic() - start > max_seconds:
                truncated = True
                break
            results.append(run(i))
    for rec, phi in results:
        records.append(rec)
        maps[rec.index] = phi
    valid = [r for r in records if not r.refuted]
    best_rec = max(valid, key=lambda r: (r.diamond, -abs(r.index)))
    return SampleReport(
        n=n, k=k, samples=samples, seed=seed, best=best_rec.diamond,
        best_map=maps[best_rec.index], best_source=best_rec.source, records=records,
        discarded=sum(r.refuted for r in records), truncated=truncated,
    )
