"""Exit criteria, runnable from pytest and from ``kpos verify``.

Each criterion returns a :class:`CriterionResult`; its runtime budget is part
of the pass condition.
"""

import io
import json
import time
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .bounds import r_k_exact, tomiyama_cb
from .cones import (covariant_kpeb_contains, covariant_kpos_contains, is_k_positive,
                    schmidt_rank)
from .linalg import eig_hermitian
from .maps import (CovariantMap, SuperOp, adjoint, compose, is_trace_preserving,
                   is_unital, tomiyama, transpose_map)
from .norms import cb_norm, dec_norm_covariant, rk_via_lp
from .randgen import empirical_d_lower, mean_width_trace_ball


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    seconds: float
    budget: float
    detail: str

    @property
    def ok(self):
        return self.passed and self.seconds <= self.budget

    def line(self):
        mark = "PASS" if self.ok else "FAIL"
        return f"[{mark}] {self.number:2d} {self.name:<28} {self.seconds:7.2f}s/{self.budget:.0f}s  {self.detail}"


def _timed(number, name, budget, fn):
    t0 = time.perf_counter()
    passed, detail = fn()
    return CriterionResult(number, name, bool(passed), time.perf_counter() - t0, budget, detail)


def rk_lp():
    worst = 0.0
    for n in range(2, 11):
        for k in range(1, n):
            worst = max(worst, abs(rk_via_lp(n, k) - float(r_k_exact(n, k))))
    return worst <= 1e-9, f"max |LP - (2n-k)/k| = {worst:.2e}"


def transpose_d1():
    errs = [abs(cb_norm(transpose_map(n)) - n) for n in (2, 3, 4)]
    return max(errs) <= 1e-6, f"max |cb(T_n) - n| = {max(errs):.2e} for n=2,3,4"


def tomiyama_value():
    worst_sdp = worst_lp = 0.0
    for n, k in [(3, 2), (4, 2), (4, 3), (5, 2)]:
        tau = tomiyama(n, k)
        cb = cb_norm(tau.to_superop())
        dec = dec_norm_covariant(n, n, tau.s, tau.t)
        worst_sdp = max(worst_sdp, abs(cb - float(tomiyama_cb(n, k))))
        worst_lp = max(worst_lp, abs(dec - cb))
    ok = worst_sdp <= 1e-6 and worst_lp <= 1e-6
    return ok, f"|cb - formula| <= {worst_sdp:.2e}, |dec - cb| <= {worst_lp:.2e}"


def product_grid_min(J, grid=100):
    """Brute-force min of <u(x)v|J|u(x)v> over a grid of real unit vectors in C^2."""
    th = np.linspace(0.0, np.pi, grid, endpoint=False)
    vecs = np.stack([np.cos(th), np.sin(th)], axis=1)
    prods = np.einsum("ai,bj->abij", vecs, vecs).reshape(grid * grid, 4)
    vals = np.einsum("pi,ij,pj->p", prods, J.real, prods)
    return float(vals.min())


def kpos_grid_agreement(tol=1e-6):
    """Covariant 1-positive region vs brute force on M_2 over a 20 x 10 (s, t) grid."""
    grid = [(s, t) for s in np.linspace(-1.0, 1.0, 20) for t in np.linspace(-1.0, 1.0, 10)]
    bad = []
    for s, t in grid:
        brute = product_grid_min(CovariantMap(2, s, t).choi()) >= -tol
        if brute != covariant_kpos_contains(2, 1, s, t):
            bad.append((s, t))
    return len(grid), bad


def cone_boundary():
    tau = tomiyama(4, 2)
    v2 = is_k_positive(tau, 2)
    v3 = is_k_positive(tau, 3)
    sup = tau.to_superop()
    search = is_k_positive(sup, 3, use_covariance=False)
    J = sup.choi
    ok = v2.certified and v3.refuted and search.refuted
    for v in (v3, search):
        xi = v.witness / np.linalg.norm(v.witness)
        value = float(np.vdot(xi, J @ xi).real)
        ok &= value < -1e-10 and schmidt_rank(xi, 4, 4) <= 3
    count, bad = kpos_grid_agreement()
    ok &= not bad
    return ok, (f"2-pos {v2.verdict.value}, 3-pos {v3.verdict.value} (value {v3.value:.4f}), "
                f"see-saw {search.verdict.value} (value {search.value:.4f}); "
                f"grid oracle {count - len(bad)}/{count} agree")


def gamma_region():
    ok = True
    for n in range(2, 9):
        for k in range(1, n + 1):
            if k < n:
                ok &= not covariant_kpeb_contains(n, k, 1, 0)
            ok &= covariant_kpeb_contains(n, k, 0, 1)
    ok &= covariant_kpeb_contains(3, 2, Fraction(5, 8), Fraction(3, 8))
    return ok, "identity excluded for k < n <= 8, depolarizing included, (5/8, 3/8) on boundary"


def random_peb(n, k, rng, edge=False):
    r = rng.uniform(0.0, 2.0)
    lo, hi = -r / (n * n - 1), r * (n * k - 1) / (n * n - 1)
    s = rng.choice([lo, hi]) if edge else rng.uniform(lo, hi)
    return CovariantMap(n, s, r - s)


def random_kpos(n, k, rng, edge=False):
    t = rng.uniform(0.0, 2.0)
    s = -t / (n * k) if edge else rng.uniform(-t / (n * k), 2.0)
    return CovariantMap(n, s, t)


def composition_law(pairs=100, seed=2024):
    # half the pairs sit on extreme rays of both cones, where the bound is tight
    rng = np.random.default_rng(seed)
    worst = np.inf
    for i in range(pairs):
        edge = i % 2 == 0
        psi, phi = random_peb(3, 2, rng, edge), random_kpos(3, 2, rng, edge)
        J = compose(psi.to_superop(), phi.to_superop()).choi
        worst = min(worst, eig_hermitian(J)[0][0])
    return worst >= -1e-9, f"min Choi eigenvalue over {pairs} pairs = {worst:.2e}"


def random_hp_map(n, rng, unital):
    A = rng.standard_normal((n * n, n * n)) + 1j * rng.standard_normal((n * n, n * n))
    phi = SuperOp(n, n, A + A.conj().T)
    if unital:
        # add I (x) D/n so the blocks on the diagonal sum to the identity
        out = np.einsum("iaib->ab", phi.blocks())
        corr = np.kron(np.eye(n), (np.eye(n) - out) / n)
        phi = SuperOp(n, n, phi.choi + corr)
    return phi


def duality_suite(count=50, seed=11):
    rng = np.random.default_rng(seed)
    ok, unital_seen, inv_err = True, 0, 0.0
    for i in range(count):
        phi = random_hp_map(3, rng, unital=bool(i % 2))
        a = adjoint(phi)
        ok &= is_unital(phi, 1e-9) == is_trace_preserving(a, 1e-9)
        unital_seen += is_unital(phi, 1e-9)
        inv_err = max(inv_err, float(np.max(np.abs(adjoint(a).choi - phi.choi))))
    ok &= inv_err <= 1e-12
    return ok, f"{count} maps ({unital_seen} unital), adjoint involution error {inv_err:.1e}"


def gue_width(p=64, samples=200, seed=1):
    mean, se = mean_width_trace_ball(p, samples, seed)
    root = np.sqrt(p)
    ok = 1.80 * root <= mean <= 2.00 * root and mean <= 2 * root
    return ok, f"E||G|| ~ {mean:.4f} +- {se:.4f} (2 sqrt(p) = {2 * root:.1f})"


def _sample_best(n, k, samples, seed):
    from .cli import main

    out = io.StringIO()
    code = main(["sample", "--n", str(n), "--k", str(k), "--samples", str(samples),
                 "--seed", str(seed)], out)
    return code, json.loads(out.getvalue())["best"]


def sampling_floor(samples=20, seed=7):
    """Runs the ``sample`` command itself."""
    code1, best1 = _sample_best(3, 1, samples, seed)
    code2, best2 = _sample_best(3, 2, samples, seed)
    ok = code1 == code2 == 0 and best1 >= 3 - 1e-6 and best2 >= 17 / 15 - 1e-6
    return ok, f"n=3: best k=1 {best1:.9g}, best k=2 {best2:.9g}"


def sampling_properties(samples=12, seed=5):
    """Reported lower bounds are valid floors and monotone as samples are added."""
    ok = True
    details = []
    for k, floor in [(1, 3.0), (2, 17 / 15)]:
        small = empirical_d_lower(3, k, samples // 2, seed)
        large = empirical_d_lower(3, k, samples, seed)
        run = large.running_best()
        ok &= all(b >= a for a, b in zip(run, run[1:]))
        ok &= large.best >= small.best >= floor - 1e-6
        ok &= all(v >= 1 - 1e-7 for v in large.values())
        prefix = [(r.seed, r.diamond) for r in large.records[: len(small.records)]]
        ok &= prefix == [(r.seed, r.diamond) for r in small.records]
        details.append(f"k={k}: {small.best:.6g} -> {large.best:.6g}")
    return ok, "; ".join(details) + " (no constant c asserted)"


CRITERIA = [
    (1, "r_k LP reproduction", 5, rk_lp),
    (2, "transpose / d_1", 60, transpose_d1),
    (3, "Tomiyama value", 120, tomiyama_value),
    (4, "cone boundary", 60, cone_boundary),
    (5, "Gamma region", 1, gamma_region),
    (6, "composition law", 10, composition_law),
    (7, "duality suite", 5, duality_suite),
    (8, "GUE width", 30, gue_width),
    (9, "sampling floor", 120, sampling_floor),
    (10, "sampling properties", 120, sampling_properties),
]


def run_all(quick=False, numbers=None, echo=None):
    results = []
    for number, name, budget, fn in CRITERIA:
        if numbers and number not in numbers:
            continue
        if quick and fn is sampling_floor:
            res = _timed(number, name, budget, lambda: sampling_floor(samples=4))
        elif quick and fn is sampling_properties:
            res = _timed(number, name, budget, lambda: sampling_properties(samples=4))
        else:
            res = _timed(number, name, budget, fn)
        results.append(res)
        if echo:
            echo(res.line())
    return results


__all__ = ["CRITERIA", "CriterionResult", "run_all"]
