from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kpos.bounds import tomiyama_cb
from kpos.errors import NumericalError, ParameterError, ShapeError
from kpos.linalg import eig_hermitian, operator_norm
from kpos.maps import (CovariantMap, SuperOp, adjoint, covariant, from_apply, identity_map,
                       tomiyama, transpose_map)
from kpos.norms import (ProjectionSearchConfig, cb_norm, dec_norm_covariant, diamond_norm,
                        gamma_rows, id_tensor_apply, norm_bound_checks, omin_norm_estimate,
                        rk_via_lp, trace_lower_bound)

cp = pytest.importorskip("cvxpy")


def watrous_primal(phi):
    """Diamond norm from the primal SDP, solved by cvxpy as an independent oracle."""
    n, m = phi.dims
    J = phi.choi
    X = cp.Variable((n * m, n * m), complex=True)
    rho0 = cp.Variable((n, n), hermitian=True)
    rho1 = cp.Variable((n, n), hermitian=True)
    block = cp.bmat([[cp.kron(rho0, np.eye(m)), X], [X.H, cp.kron(rho1, np.eye(m))]])
    cons = [0.5 * (block + block.H) >> 0, rho0 >> 0, rho1 >> 0,
            cp.real(cp.trace(rho0)) == 1, cp.real(cp.trace(rho1)) == 1]
    objective = cp.Maximize(cp.real(cp.trace(J.conj().T @ X)))
    prob = cp.Problem(objective, cons)
    prob.solve(solver="CLARABEL")
    return prob.value


def random_unital_cp(n, rng):
    A = rng.standard_normal((n * n, n * n)) + 1j * rng.standard_normal((n * n, n * n))
    J = A @ A.conj().T
    out = np.einsum("iaib->ab", J.reshape(n, n, n, n))
    w, U = eig_hermitian(out)
    R = (U / np.sqrt(w)) @ U.conj().T
    K = np.kron(np.eye(n), R)
    return SuperOp(n, n, K @ J @ K.conj().T)


def test_diamond_examples():
    assert diamond_norm(identity_map(2)) == pytest.approx(1.0, abs=1e-7)
    assert diamond_norm(transpose_map(3)) == pytest.approx(3.0, abs=1e-6)
    tau_adj = adjoint(tomiyama(3, 2).to_superop())
    assert diamond_norm(tau_adj) == pytest.approx(17 / 15, abs=1e-6)
    assert trace_lower_bound(tau_adj) == pytest.approx(17 / 15, abs=1e-12)
    assert diamond_norm(SuperOp(2, 2, np.zeros((4, 4)))) == 0.0


def test_cb_examples():
    assert cb_norm(covariant(3, 0, 1)) == pytest.approx(1.0, abs=1e-6)
    assert cb_norm(tomiyama(4, 2)) == pytest.approx(8 / 7, abs=1e-6)
    for n in (2, 3, 4):
        assert cb_norm(transpose_map(n)) == pytest.approx(n, abs=1e-6)


@pytest.mark.parametrize("n, k", [(3, 2), (4, 2), (4, 3), (5, 2)])
def test_tomiyama_cb_formula(n, k):
    assert cb_norm(tomiyama(n, k)) == pytest.approx(float(tomiyama_cb(n, k)), abs=1e-6)


@pytest.mark.parametrize("phi", [
    transpose_map(2),
    tomiyama(3, 2).to_superop(),
    from_apply(2, 3, lambda X: np.array([[X[0, 0], X[0, 1], 0], [X[1, 0], -X[1, 1], 0],
                                         [0, 0, X[0, 0] + 2 * X[1, 1]]])),
])
def test_diamond_against_cvxpy_primal(phi):
    assert diamond_norm(phi) == pytest.approx(watrous_primal(phi), abs=1e-5)


def test_non_hermitian_preserving_against_cvxpy_primal():
    rng = np.random.default_rng(8)
    phi = SuperOp(2, 2, rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)))
    assert not phi.is_hermitian_preserving
    value = diamond_norm(phi)
    assert value >= trace_lower_bound(phi) - 1e-7
    assert value == pytest.approx(watrous_primal(phi), abs=1e-5)


def test_diamond_full_output():
    value, res = diamond_norm(transpose_map(2), full_output=True)
    assert res.ok and value == res.optimum


def test_dec_norm_examples():
    assert dec_norm_covariant(3, 2, 1, 0) == pytest.approx(2.0, abs=1e-9)
    assert dec_norm_covariant(4, 2, 1, 0) == pytest.approx(3.0, abs=1e-9)
    assert dec_norm_covariant(4, 3, 1, 0) == pytest.approx(5 / 3, abs=1e-9)
    assert dec_norm_covariant(4, 4, 1, 0) == pytest.approx(1.0, abs=1e-9)
    tau = tomiyama(3, 2)
    value = dec_norm_covariant(3, 3, tau.s, tau.t)
    assert value == pytest.approx(17 / 15, abs=1e-9)
    assert value == pytest.approx(cb_norm(tau), abs=1e-6)
    with pytest.raises(ParameterError):
        dec_norm_covariant(3, 4, 1, 0)


def test_gamma_rows_match_region():
    from kpos.cones import covariant_kpeb_contains

    for s, t in [(Fraction(5, 8), Fraction(3, 8)), (Fraction(1), Fraction(0)), (Fraction(-1, 9), 1)]:
        rows_ok = all(a * s + b * t >= 0 for a, b in gamma_rows(3, 2))
        assert rows_ok == covariant_kpeb_contains(3, 2, s, t)


def test_rk_lp_all_pairs():
    from kpos.bounds import r_k_exact

    for n in range(2, 11):
        for k in range(1, n):
            assert rk_via_lp(n, k) == pytest.approx(float(r_k_exact(n, k)), abs=1e-9)


def test_omin_estimate_examples():
    assert omin_norm_estimate(np.eye(4), 2, 1) == pytest.approx(1.0, abs=1e-9)
    rng = np.random.default_rng(0)
    A = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    assert omin_norm_estimate(A, 3, 3) == pytest.approx(operator_norm(A))
    with pytest.raises(ShapeError):
        omin_norm_estimate(np.eye(5), 2, 1)


def test_omin_estimate_corollary_ratio():
    rng = np.random.default_rng(11)
    for _ in range(3):
        A = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        est = omin_norm_estimate(A, 2, 1, ProjectionSearchConfig(restarts=50))
        assert operator_norm(A) <= 3 * est + 1e-6
        assert est <= operator_norm(A) + 1e-12


def test_id_tensor_apply_matches_kron():
    rng = np.random.default_rng(2)
    A = rng.standard_normal((2, 2))
    B = rng.standard_normal((3, 3))
    T = transpose_map(3)
    assert np.allclose(id_tensor_apply(T, np.kron(A, B)), np.kron(A, B.T))


def test_norm_bound_checks_examples():
    ident = norm_bound_checks(identity_map(2), samples=20)
    assert ident["schema"] == "kpos/1"
    for key in ("cb", "diamond", "trace_lower_bound"):
        assert ident[key] == pytest.approx(1.0, abs=1e-6)
    T = norm_bound_checks(transpose_map(2), samples=20)
    assert T["cb"] == pytest.approx(2.0, abs=1e-6)
    assert T["trace_lower_bound"] == pytest.approx(2.0, abs=1e-12)
    assert T["sampled_operator_lower_bound"] == pytest.approx(2.0, abs=1e-9)
    tau = norm_bound_checks(tomiyama(3, 2).to_superop(), samples=20)
    assert tau["cb"] == pytest.approx(17 / 15, abs=1e-6)
    assert tau["trace_lower_bound"] == pytest.approx(17 / 15, abs=1e-12)
    with pytest.raises(ShapeError):
        norm_bound_checks(from_apply(2, 3, lambda X: np.pad(X, ((0, 1), (0, 1)))))


def test_trace_bound_violation_is_reported(monkeypatch):
    import kpos.norms as norms

    monkeypatch.setattr(norms, "trace_lower_bound", lambda phi: 100.0)
    with pytest.raises(NumericalError):
        diamond_norm(transpose_map(2))


def test_cp_calibration():
    rng = np.random.default_rng(4)
    for _ in range(50):
        phi = random_unital_cp(3, rng)
        assert cb_norm(phi) == pytest.approx(1.0, abs=1e-6)


def test_lp_sdp_cross_agreement():
    rng = np.random.default_rng(6)
    for _ in range(30):
        s, t = rng.uniform(-2, 2, size=2)
        assert dec_norm_covariant(3, 3, s, t) == pytest.approx(cb_norm(CovariantMap(3, s, t)),
                                                               abs=1e-6)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2 ** 31))
def test_sandwich(seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((9, 9)) + 1j * rng.standard_normal((9, 9))
    phi = SuperOp(3, 3, A + A.conj().T)
    cb = cb_norm(phi)
    assert trace_lower_bound(adjoint(phi)) - 1e-6 <= cb
    unital = random_unital_cp(3, rng)
    assert cb_norm(unital) >= 1 - 1e-7


@pytest.mark.parametrize("c", [2, -2, 1 / 3])
def test_scale_covariance(c):
    phi = tomiyama(3, 2).to_superop()
    assert cb_norm(c * phi) == pytest.approx(abs(c) * cb_norm(phi), abs=1e-8)
