import io

import numpy as np
import pytest
import scipy.sparse as sps

from causalsep.catalog import make_W_etas
from causalsep.conic import BACKENDS, ConicProgram, PSDBlock, Status, solve
from causalsep.conic.embed import dual_unembed, embed, embed_program, unembed
from causalsep.conic.sdpa import read_sdpa, write_sdpa
from causalsep.robustness import _dual_program, _primal_program, _scenario_pair, Restriction


def lambda_max_program(Z):
    """minimize r s.t. r 1 - Z >= 0."""
    d = Z.shape[0]
    return ConicProgram(1, [1.0], [PSDBlock.from_dense(-Z, [np.eye(d)])])


@pytest.mark.parametrize(
    "Z, expected",
    [
        (np.eye(2), 1.0),
        (np.diag([0.3, -2.0]), 0.3),
        (np.array([[0, 1], [1, 0]]), 1.0),
        (np.array([[1, 1j], [-1j, 1]]), 2.0),
    ],
)
def test_largest_eigenvalue(Z, expected):
    res = solve(lambda_max_program(np.asarray(Z, dtype=complex)))
    assert res.status is Status.OPTIMAL
    assert res.objective_value == pytest.approx(expected, abs=1e-7)


def test_random_hermitian_largest_eigenvalue(rng):
    G = rng.normal(size=(12, 12)) + 1j * rng.normal(size=(12, 12))
    Z = G + G.conj().T
    res = solve(lambda_max_program(Z))
    assert res.objective_value == pytest.approx(np.linalg.eigvalsh(Z)[-1], abs=1e-7)
    assert res.gap <= 1e-7


def test_white_noise_program_gives_minus_one():
    # 1/d_I + r 1/d_I separable iff 1 + r >= 0
    W, N, sc = _scenario_pair(make_W_etas(0, 0), None)
    builder = _primal_program(W, N, sc)[0]
    res = solve(builder.build())
    assert res.objective_value == pytest.approx(-1.0, abs=1e-7)


def test_equality_constrained():
    # minimize x0 + x1 with x0 = 2 x1 and [[x0, 1], [1, x1]] >= 0  ->  x1 = 1/sqrt2
    F0 = np.array([[0, 1], [1, 0]], dtype=float)
    blk = PSDBlock.from_dense(F0, [np.diag([1.0, 0.0]), np.diag([0.0, 1.0])])
    prog = ConicProgram(2, [1.0, 1.0], [blk], [[1.0, -2.0]], [0.0])
    res = solve(prog)
    assert res.objective_value == pytest.approx(3 / np.sqrt(2), abs=1e-7)
    assert res.x[0] == pytest.approx(2 * res.x[1], abs=1e-8)


def test_infeasible():
    # x >= 0 and -x - 1 >= 0
    prog = ConicProgram(1, [1.0], [PSDBlock.from_dense(np.zeros((1, 1)), [np.eye(1)]),
                                   PSDBlock.from_dense(-np.eye(1), [-np.eye(1)])])
    assert solve(prog).status is Status.INFEASIBLE


def test_inconsistent_equalities():
    prog = ConicProgram(1, [0.0], [PSDBlock.from_dense(np.eye(1), [np.eye(1)])], [[1.0], [2.0]], [1.0, 1.0])
    assert solve(prog).status is Status.INFEASIBLE


def test_unbounded():
    prog = ConicProgram(1, [-1.0], [PSDBlock.from_dense(np.zeros((1, 1)), [np.eye(1)])])
    assert solve(prog).status is Status.UNBOUNDED


def test_unknown_backend():
    with pytest.raises(ValueError):
        solve(lambda_max_program(np.eye(2)), backend="nope")
    assert "builtin" in BACKENDS


def test_block_validation():
    with pytest.raises(ValueError):
        PSDBlock.from_dense(np.array([[0, 1], [0, 0]]), [])
    with pytest.raises(ValueError):
        ConicProgram(2, [1.0], [])


@pytest.fixture(scope="module")
def eta_programs():
    W, N, sc = _scenario_pair(make_W_etas(0.7, -0.6), None)
    primal = _primal_program(W, N, sc)[0].build()
    dual = _dual_program(W, N, sc, Restriction("none"))[0].build()
    return primal, dual


def test_weak_duality_along_iterates(eta_programs):
    for prog in eta_programs:
        res = solve(prog)
        assert res.ok
        for h in res.history:
            if h["pinf"] < 1e-6 and h["dinf"] < 1e-6:
                assert h["dobj"] <= h["pobj"] + 1e-6


def test_optimal_result_invariants(eta_programs):
    tol = 1e-8
    for prog in eta_programs:
        res = solve(prog, tol=tol)
        assert res.status is Status.OPTIMAL
        assert abs(res.gap) <= 10 * tol * (1 + abs(res.objective_value))
        assert prog.primal_residual(res.x) <= 1e-7
        for Z in res.block_duals:
            assert np.linalg.eigvalsh(Z)[0] >= -1e-7


def test_primal_dual_values_match(eta_programs):
    primal, dual = eta_programs
    assert solve(primal).objective_value == pytest.approx(-solve(dual).objective_value, abs=1e-6)
    assert solve(primal).objective_value == pytest.approx(0.3, abs=1e-6)


def test_variable_reordering_invariance(eta_programs, rng):
    prog = eta_programs[0]
    perm = rng.permutation(prog.n_vars)
    blocks = [PSDBlock(b.constant, b.coeffs[perm]) for b in prog.blocks]
    shuffled = ConicProgram(prog.n_vars, prog.objective[perm], blocks, prog.eq_matrix[:, perm], prog.eq_rhs)
    a, b = solve(prog), solve(shuffled)
    assert b.objective_value == pytest.approx(a.objective_value, abs=1e-7)


def test_row_scaling_invariance(eta_programs, rng):
    prog = eta_programs[0]
    s = rng.uniform(0.1, 10.0, size=prog.n_eq)
    scaled = ConicProgram(prog.n_vars, prog.objective, prog.blocks, prog.eq_matrix * s[:, None], prog.eq_rhs * s)
    assert solve(scaled).objective_value == pytest.approx(solve(prog).objective_value, abs=1e-7)


def test_embedding_round_trip(rng):
    G = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    H = G + G.conj().T
    E = embed(H)
    assert np.allclose(E, E.T)
    assert np.allclose(unembed(E), H)
    ev = np.sort(np.linalg.eigvalsh(H))
    assert np.allclose(np.sort(np.linalg.eigvalsh(E)), np.sort(np.concatenate([ev, ev])))
    F = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    F = F + F.conj().T
    Z = rng.normal(size=(8, 8))
    Z = Z + Z.T
    assert np.real(np.trace(F @ dual_unembed(Z))) == pytest.approx(np.trace(embed(F) @ Z))


@pytest.mark.parametrize("which", [0, 1], ids=["primal", "dual"])
def test_complex_and_embedded_agree(eta_programs, which):
    prog = eta_programs[which]
    assert any(b.is_complex for b in prog.blocks)
    a = solve(prog).objective_value
    b = solve(embed_program(prog)).objective_value
    assert a == pytest.approx(b, abs=1e-8)


def test_sdpa_round_trip(eta_programs):
    prog = embed_program(eta_programs[0])
    buf = io.StringIO()
    text = write_sdpa(prog, buf)
    assert buf.getvalue() == text
    lines = [ln for ln in text.splitlines() if not ln.startswith("*")]
    assert int(lines[0]) == prog.n_vars
    back = read_sdpa(text)
    assert back.n_vars == prog.n_vars and back.n_eq == prog.n_eq
    assert solve(back).objective_value == pytest.approx(solve(prog).objective_value, abs=1e-8)


def test_sparse_coefficients_accepted():
    blk = PSDBlock(-np.diag([1.0, 2.0]), sps.csr_matrix(np.eye(2).reshape(1, -1)))
    res = solve(ConicProgram(1, [1.0], [blk]))
    assert res.objective_value == pytest.approx(2.0, abs=1e-7)


@pytest.mark.parametrize("which", [0, 1], ids=["primal", "dual"])
def test_cvxpy_backend_agrees(eta_programs, which):
    pytest.importorskip("cvxpy")
    prog = eta_programs[which]
    ref = solve(prog, backend="cvxpy")
    assert ref.ok
    assert solve(prog).objective_value == pytest.approx(ref.objective_value, abs=1e-6)
    assert ref.dual_objective == pytest.approx(ref.objective_value, abs=1e-6)
