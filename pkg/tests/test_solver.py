import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kpos.errors import ShapeError
from kpos.linalg import haar_unitary
from kpos.maps import identity_map, tomiyama, transpose_map
from kpos.norms import diamond_program, rk_program
from kpos.solver import (LinearProgram, SemidefiniteProgram, SolverOptions, Status, dump_program,
                         lp_solve, sdp_solve)


def rk_lp(a, b):
    # min 2r + 1 over (r, s) with r >= 0 and the two sandwich constraints
    A = [[-b, 1], [-a, -1], [-b, 1], [-a, -1]]
    rhs = [0, 0, b - 1, 1 + a]
    return LinearProgram(c=[2, 0], A=A, b=rhs, lower=[0, -np.inf], upper=[np.inf, np.inf])


@pytest.mark.parametrize("a, b, expected", [(1 / 8, 5 / 8, 2.0), (1 / 15, 7 / 15, 3.0)])
def test_rk_lp_examples(a, b, expected):
    res = lp_solve(rk_lp(a, b))
    assert res.status == Status.OPTIMAL
    assert res.optimum + 1 == pytest.approx(expected, abs=1e-7)


def test_rk_lp_optimal_point():
    res = lp_solve(rk_program(3, 2))
    assert res.primal[0] == pytest.approx(0.5, abs=1e-7)


def test_single_bound_lp():
    res = lp_solve(LinearProgram(c=[1], A=[[1]], b=[5], senses=[">="], lower=-np.inf))
    assert res.ok and res.optimum == pytest.approx(5.0, abs=1e-7)


def test_lp_max_direction_and_upper_bounds():
    p = LinearProgram(c=[1, 2], A=[[1, 1]], b=[3], lower=[0, 0], upper=[np.inf, 2],
                      direction="max")
    res = lp_solve(p)
    assert res.ok and res.optimum == pytest.approx(5.0, abs=1e-7)
    assert res.primal == pytest.approx([1, 2], abs=1e-6)


def test_lp_infeasible_and_unbounded():
    infeasible = LinearProgram(c=[1], A=[[1], [1]], b=[1, 2], senses=["<=", ">="])
    assert lp_solve(infeasible).status == Status.INFEASIBLE
    unbounded = LinearProgram(c=[-1], A=[[-1]], b=[0])
    assert lp_solve(unbounded).status == Status.UNBOUNDED
    empty = LinearProgram(c=[1], A=[[1]], b=[1], lower=[2], upper=[1])
    assert lp_solve(empty).status == Status.INFEASIBLE


def test_lp_shape_checks():
    with pytest.raises(ShapeError):
        LinearProgram(c=[1, 1], A=[[1, 1]], b=[1, 2])
    with pytest.raises(ShapeError):
        LinearProgram(c=[1], A=[[1]], b=[1], senses=["<"])


def test_sdp_trace_example():
    # tr X <= 1 written as tr X + slack = 1 with a diagonal slack block
    p = SemidefiniteProgram(blocks=[2, -1], objective=[np.eye(2), None],
                            constraints=[([np.eye(2), [1.0]], 1.0)], direction="max")
    res = sdp_solve(p)
    assert res.ok and res.optimum == pytest.approx(1.0, abs=1e-8)


def test_sdp_complex_data():
    # max Re<C, X> over density matrices = top eigenvalue of C
    rng = np.random.default_rng(4)
    A = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    C = A + A.conj().T
    p = SemidefiniteProgram(blocks=[3], objective=[C], constraints=[([np.eye(3)], 1.0)],
                            direction="max")
    res = sdp_solve(p)
    assert res.optimum == pytest.approx(np.linalg.eigvalsh(C)[-1], abs=1e-7)


def test_sdp_infeasible():
    p = SemidefiniteProgram(blocks=[2], objective=[np.eye(2)],
                            constraints=[([np.eye(2)], -1.0)])
    assert sdp_solve(p).status == Status.INFEASIBLE


def test_sdp_shape_checks():
    with pytest.raises(ShapeError):
        SemidefiniteProgram(blocks=[2], objective=[None, None], constraints=[])
    with pytest.raises(ShapeError):
        SemidefiniteProgram(blocks=[2], objective=[None], constraints=[([None, None], 0.0)])
    with pytest.raises(ShapeError):
        SemidefiniteProgram(blocks=[2], objective=[None], constraints=[], direction="sideways")


def test_diamond_sdp_examples():
    assert sdp_solve(diamond_program(identity_map(2))).optimum == pytest.approx(1.0, abs=1e-7)
    assert sdp_solve(diamond_program(transpose_map(3))).optimum == pytest.approx(3.0, abs=1e-6)


def test_weak_duality_along_path():
    res = sdp_solve(diamond_program(tomiyama(3, 2).to_superop()))
    feasible = [(p, d) for p, d, pinf, dinf in res.history if pinf <= 1e-8 and dinf <= 1e-8]
    assert feasible
    for pobj, dobj in feasible:
        assert pobj >= dobj - 1e-9 * (1 + abs(pobj))


def test_status_contract():
    res = sdp_solve(diamond_program(transpose_map(2)))
    assert res.ok
    assert res.relative_gap <= 1e-8
    assert res.primal_residual <= 1e-9


def test_max_iterations_reported():
    res = sdp_solve(diamond_program(transpose_map(2)), SolverOptions(max_iter=2))
    assert res.status == Status.MAX_ITERATIONS
    assert res.iterations <= 3


@settings(max_examples=20, deadline=None)
@given(st.lists(st.floats(0.1, 10.0), min_size=4, max_size=4))
def test_lp_row_scaling_invariance(scales):
    base = rk_program(4, 2)
    scaled = LinearProgram(c=base.c, A=base.A * np.array(scales)[:, None],
                           b=base.b * np.array(scales), lower=base.lower, upper=base.upper)
    assert lp_solve(scaled).optimum == pytest.approx(lp_solve(base).optimum, abs=1e-7)


@settings(max_examples=5, deadline=None)
@given(st.integers(0, 2 ** 31))
def test_sdp_unitary_conjugation_invariance(seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    C = A + A.conj().T
    B = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    B = B @ B.conj().T + np.eye(3)
    U = haar_unitary(3, rng)

    def conj(M):
        return U @ M @ U.conj().T

    def program(Cm, Bm):
        return SemidefiniteProgram(blocks=[3, -1], objective=[Cm, None],
                                   constraints=[([Bm, [1.0]], 1.0)], direction="max")

    base = sdp_solve(program(C, B)).optimum
    rotated = sdp_solve(program(conj(C), conj(B))).optimum
    assert rotated == pytest.approx(base, abs=1e-7 * (1 + abs(base)))


def test_dump_program(tmp_path):
    path = tmp_path / "prog.json"
    prog = diamond_program(transpose_map(2))
    dump_program(prog, path)
    doc = json.loads(path.read_text())
    assert doc["schema"] == "kpos/1"
    assert doc["blocks"] == [4, 4, 2, -1]
    assert len(doc["constraints"]) == prog.n_constraints
    first = doc["constraints"][0]["coefficients"][0]
    assert first["rows"] == 4 and len(first["data"]) == 16
