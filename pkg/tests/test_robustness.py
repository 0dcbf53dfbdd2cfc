import numpy as np
import pytest

from causalsep import pauli
from causalsep.catalog import make_S_etas, make_S_family, make_S_switch, make_S_tilde, make_W_etas, make_switch
from causalsep.catalog.processes import make_sep_decomposition_etas
from causalsep.robustness import (
    BoundaryNoiseWarning,
    SolverError,
    charlie_basis_restriction,
    constraint_residuals,
    construct_witness,
    generalized_robustness,
    marginal_restriction,
    random_robustness,
    solve_dual,
    solve_primal,
    threshold_from_value,
    unitary_restriction,
    unitary_restriction_constraints,
    verify_witness,
)
from causalsep.spaces import BI, TRI, is_in_order_cone, project_valid
from causalsep.tensor import Operator, Replace, hs_inner
from causalsep.witness import Witness

from conftest import random_hermitian

NONSEP_ETAS = [(0.8, 0.6), (1 / np.sqrt(2), 1 / np.sqrt(2)), (-0.9, 0.3), (0.5, -0.85)]
SEP_ETAS = [(0.0, 0.0), (0.5, 0.5), (0.3, -0.6), (1.0, 0.0)]


@pytest.mark.parametrize("eta", NONSEP_ETAS + SEP_ETAS)
def test_bipartite_primal_matches_l1_norm(eta):
    r, dec, _ = solve_primal(make_W_etas(*eta))
    assert r == pytest.approx(abs(eta[0]) + abs(eta[1]) - 1, abs=1e-6)
    assert dec.verify(1e-6)


@pytest.mark.parametrize("eta", [(0.5, 0.5), (0.3, -0.6), (0.1, 0.7)])
def test_separable_weights_follow_eta(eta):
    _, dec, _ = solve_primal(make_W_etas(*eta))
    s = abs(eta[0]) + abs(eta[1])
    assert sorted(dec.weights()) == pytest.approx(sorted([abs(eta[0]) / s, abs(eta[1]) / s]), abs=1e-5)


@pytest.mark.parametrize("eta", [(0.5, 0.5), (0.3, -0.6), (-0.2, -0.4)])
def test_analytic_separable_decomposition(eta):
    dec = make_sep_decomposition_etas(*eta)
    W = make_W_etas(*eta)
    assert np.allclose(dec.total().matrix, W.matrix, atol=1e-12)
    for order, comp in zip(BI.orders, dec.components):
        assert is_in_order_cone(comp, order)


@pytest.mark.parametrize("layout_kind", ["bi", "tri"])
def test_white_noise_is_maximally_robust(layout_kind):
    sc = BI if layout_kind == "bi" else TRI
    rep = random_robustness(sc.white_noise())
    assert rep.r_star == pytest.approx(-1.0, abs=1e-6)
    assert rep.random_robustness == 0.0
    assert rep.visibility_threshold == 1.0


@pytest.mark.parametrize("eta", NONSEP_ETAS)
def test_dual_witness_normalised_and_tight(eta):
    W = make_W_etas(*eta)
    rep = random_robustness(W)
    assert hs_inner(rep.witness.op, BI.white_noise()) == pytest.approx(1.0, abs=1e-8)
    assert rep.r_star == pytest.approx(-rep.witness_value, abs=1e-6)
    assert abs(rep.duality_gap) < 1e-6
    assert verify_witness(rep.witness, tol=1e-6).valid


def test_witness_is_nonnegative_on_separable(rng):
    S, value = construct_witness(make_W_etas(0.8, 0.6))
    assert value < 0
    for _ in range(20):
        e1, e2 = rng.uniform(-1, 1, 2)
        if abs(e1) + abs(e2) <= 1:
            assert hs_inner(S.op, make_W_etas(e1, e2)) >= -1e-7


def test_gauge_shift_leaves_value_unchanged(rng):
    W = make_W_etas(0.8, 0.6)
    S, value = construct_witness(W)
    H = random_hermitian(rng, W.layout)
    perp = H - project_valid(H)
    shifted = S.op + perp
    assert hs_inner(shifted, W) == pytest.approx(value, abs=1e-10)
    assert verify_witness(Witness(shifted), tol=1e-6).valid


@pytest.mark.parametrize("noise_eta", [(0.0, 0.5), (0.2, -0.3)])
def test_interior_noise(noise_eta):
    W = make_W_etas(0.8, 0.6)
    N = make_W_etas(*noise_eta)
    rep = random_robustness(W, N)
    assert rep.r_star > 0
    mix = (W.op + N.op * rep.r_star) * (1 / (1 + rep.r_star))
    r_mix, _, _ = solve_primal(mix)
    assert r_mix == pytest.approx(0.0, abs=1e-5)
    assert hs_inner(rep.witness.op, N) == pytest.approx(1.0, abs=1e-8)


def test_boundary_noise_warns_and_points_to_visibility():
    W = make_W_etas(0.8, 0.6)
    with pytest.warns(BoundaryNoiseWarning):
        with pytest.raises(SolverError, match="robustness_at_visibility"):
            random_robustness(W, make_W_etas(1.0, 0.0))


def test_threshold_from_value():
    assert threshold_from_value(-0.5) == pytest.approx(2 / 3)
    assert threshold_from_value(0.2) == 1.0


# --- restrictions ------------------------------------------------------------


def test_unitary_restriction_mask_matches_marginals(rng):
    cons = unitary_restriction_constraints(TRI)
    basis = unitary_restriction(TRI).basis
    n = 5
    coeffs = basis @ rng.normal(size=basis.shape[1])
    S = Operator(TRI.layout, pauli.coefficients_to_matrix(n, coeffs))
    assert max(constraint_residuals(S, cons).values()) < 1e-12


def test_tabulated_unitary_witness_satisfies_marginals():
    cons = unitary_restriction_constraints(TRI)
    assert max(constraint_residuals(make_S_tilde().op, cons).values()) < 5e-3
    assert max(constraint_residuals(make_S_switch().op, cons).values()) > 0.05


def test_empty_restriction_is_infeasible():
    W = make_W_etas(0.8, 0.6)
    # every string killed, so tr[S N] = 1 cannot hold
    kill_all = [Replace.one()]
    with pytest.raises(SolverError):
        construct_witness(W, restriction=marginal_restriction(BI, kill_all, "empty"))


def test_charlie_restriction_needs_tripartite():
    with pytest.raises(ValueError):
        charlie_basis_restriction(BI, [np.eye(2)])


def test_restricted_witness_on_switch(switch):
    S, value = construct_witness(switch, restriction="unitary")
    assert value == pytest.approx(-0.5058, abs=5e-3)
    assert max(constraint_residuals(S.op, unitary_restriction_constraints(TRI)).values()) < 1e-9
    assert verify_witness(S, tol=1e-6).valid


# --- verification ------------------------------------------------------------


def test_psd_operator_is_a_witness(rng):
    g = rng.normal(size=(16, 16)) + 1j * rng.normal(size=(16, 16))
    S = Operator(BI.layout, g @ g.conj().T)
    assert verify_witness(S).valid


def test_negative_identity_is_not_a_witness():
    S = Operator(BI.layout, -np.eye(16))
    rep = verify_witness(S)
    assert not rep.valid
    assert rep.worst_residual > 0


@pytest.mark.parametrize("eta", [(0.8, 0.6), (-0.5, 0.7)])
def test_analytic_bipartite_certificate(eta):
    S = make_S_etas(*eta)
    assert verify_witness(S, tol=1e-9).valid
    assert hs_inner(S.op, make_W_etas(*eta)) < 0


@pytest.mark.parametrize("v", [0.2, 0.6, 1.0])
def test_analytic_family_certificate(v):
    assert verify_witness(make_S_family(v), tol=1e-9).valid


def test_certificate_search_agrees_with_attached():
    S = make_S_family(0.6)
    assert verify_witness(S, tol=1e-7, search=True).valid


# --- generalized robustness ----------------------------------------------------


@pytest.mark.parametrize("eta", SEP_ETAS[:3])
def test_generalized_robustness_zero_when_separable(eta):
    assert generalized_robustness(make_W_etas(*eta)).value == pytest.approx(0.0, abs=1e-6)


@pytest.mark.parametrize("eta", NONSEP_ETAS)
def test_generalized_bounded_by_random(eta):
    W = make_W_etas(*eta)
    g = generalized_robustness(W)
    r, _, _ = solve_primal(W)
    assert 0 < g.value <= r + 1e-6
    assert g.decomposition.verify(1e-6)
    assert np.allclose(g.decomposition.total().matrix, (W.op + g.omega).matrix, atol=1e-6)


# --- independent backend -------------------------------------------------------


@pytest.mark.parametrize("eta", [(0.8, 0.6), (-0.9, 0.3)])
def test_cvxpy_backend_agrees(eta):
    pytest.importorskip("cvxpy")
    W = make_W_etas(*eta)
    _, v_builtin, _ = solve_dual(W)
    _, v_cvx, _ = solve_dual(W, backend="cvxpy")
    assert v_cvx == pytest.approx(v_builtin, abs=1e-5)


def test_switch_report(switch_report):
    assert switch_report.r_star == pytest.approx(1.576, abs=5e-3)
    assert abs(switch_report.duality_gap) < 1e-6
    assert switch_report.decomposition.verify(1e-6)
    assert verify_witness(switch_report.witness, tol=1e-6).valid


def test_switch_minus_matches_switch(switch_report):
    r, _, _ = solve_primal(make_switch(sign=-1))
    assert r == pytest.approx(switch_report.r_star, abs=1e-5)
