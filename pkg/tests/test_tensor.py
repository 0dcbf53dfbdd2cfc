import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from causalsep import pauli
from causalsep.tensor import (
    BIPARTITE,
    TRIPARTITE,
    Operator,
    Replace,
    SystemLayout,
    hs_inner,
    is_psd,
    min_eigenvalue,
    partial_trace,
    tensor,
    trace_and_replace,
)
from conftest import random_hermitian, random_psd

TWO = SystemLayout.of(("a", 2, "A"), ("b", 2, "B"))
ONE = SystemLayout.of(("a", 2, "A"))


def test_layout_rejects_duplicate_labels():
    with pytest.raises(ValueError):
        SystemLayout.of(("a", 2, "A"), ("a", 2, "B"))


def test_layout_json_round_trip():
    assert SystemLayout.from_json(TRIPARTITE.to_json()) == TRIPARTITE
    assert TRIPARTITE.dim == 32 and BIPARTITE.dim == 16


@pytest.mark.parametrize(
    "layout, string, expected",
    [
        (TWO, "11", np.eye(4)),
        (ONE, "Z", np.diag([1, -1])),
        (TWO, "XZ", np.array([[0, 0, 1, 0], [0, 0, 0, -1], [1, 0, 0, 0], [0, -1, 0, 0]])),
        (ONE, "Y", np.array([[0, -1j], [1j, 0]])),
    ],
)
def test_pauli_string_matrix(layout, string, expected):
    assert np.array_equal(pauli.pauli_string_matrix(layout, string).matrix, expected)


def test_pauli_string_length_mismatch():
    with pytest.raises(ValueError):
        pauli.pauli_string_matrix(TWO, "XYZ")


def test_non_qubit_layout_rejected():
    qutrit = SystemLayout.of(("a", 3, "A"))
    with pytest.raises(ValueError):
        pauli.to_pauli(Operator(qutrit, np.eye(3)))


def test_identity_expansion():
    assert pauli.to_pauli(Operator(TWO, np.eye(4) / 4)).terms == {"11": 0.25}


def test_coefficient_is_normalised_trace(rng):
    H = random_hermitian(rng, BIPARTITE)
    e = pauli.to_pauli(H)
    for s in ("1111", "XYZ1", "ZZZZ", "1Y1X"):
        expected = np.trace(pauli.pauli_string_matrix(BIPARTITE, s).matrix @ H.matrix).real / 16
        assert e[s] == pytest.approx(expected, abs=1e-13)


@pytest.mark.parametrize("seed", range(5))
def test_pauli_round_trip(layout, seed):
    H = random_hermitian(np.random.default_rng(seed), layout)
    back = pauli.from_pauli(pauli.to_pauli(H))
    assert np.max(np.abs(back.matrix - H.matrix)) < 1e-12


def test_pauli_orthogonality():
    strings = ["1111", "XZ1Y", "ZZ11", "1Y1X"]
    for s in strings:
        for t in strings:
            v = hs_inner(pauli.pauli_string_matrix(BIPARTITE, s), pauli.pauli_string_matrix(BIPARTITE, t))
            assert v == pytest.approx(16.0 if s == t else 0.0, abs=1e-12)


def test_non_hermitian_rejected():
    with pytest.raises(ValueError):
        Operator(ONE, np.array([[0, 1], [0, 0]]))


def test_partial_trace_of_product():
    A = Operator(ONE, np.array([[2, 1j], [-1j, 1]]))
    B = Operator(SystemLayout.of(("b", 2, "B")), np.diag([0.3, 0.7]))
    out = partial_trace(tensor(A, B), ["a"])
    assert np.allclose(out.matrix, A.trace() * B.matrix, atol=1e-14)


def test_partial_trace_unknown_label():
    with pytest.raises(KeyError):
        partial_trace(Operator(TWO, np.eye(4)), ["zz"])


@pytest.mark.parametrize("over", [["A_I"], ["B_O", "A_O"], ["C_I"], ["A_I", "A_O", "B_I", "B_O"]])
def test_partial_trace_preserves_trace(rng, over):
    H = random_hermitian(rng, TRIPARTITE)
    out = partial_trace(H, over)
    assert out.trace() == pytest.approx(H.trace(), abs=1e-12)
    assert out.layout.labels == tuple(lab for lab in TRIPARTITE.labels if lab not in over)


def test_trace_and_replace_identity_fixed():
    one = Operator.identity(BIPARTITE)
    assert trace_and_replace(one, ["A_O", "B_I"]).allclose(one)


def test_trace_and_replace_pauli_rule():
    killed = pauli.operator(BIPARTITE, {"Z1XZ": 1.0})
    kept = pauli.operator(BIPARTITE, {"1ZZ1": 1.0})
    assert trace_and_replace(killed, ["B_O"]).norm() < 1e-14
    assert trace_and_replace(kept, ["B_O"]).allclose(kept)


def test_replace_algebra_matches_matrix(rng):
    H = random_hermitian(rng, BIPARTITE)
    B_O, A_O = Replace.on("B_O"), Replace.on("A_O")
    expr = (1 - B_O) * A_O
    direct = Operator(BIPARTITE, trace_and_replace(H, ["A_O"]).matrix - trace_and_replace(H, ["A_O", "B_O"]).matrix)
    assert expr(H).allclose(direct, atol=1e-12)
    # keep/kill diagonal reproduces the map on Pauli coefficients
    diag = expr.pauli_diagonal(BIPARTITE)
    assert np.allclose(pauli.pauli_coefficients(expr(H)), diag * pauli.pauli_coefficients(H), atol=1e-13)


labels_strategy = st.sets(st.sampled_from(TRIPARTITE.labels), min_size=1, max_size=3)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), labels=labels_strategy)
def test_trace_and_replace_properties(seed, labels):
    rng = np.random.default_rng(seed)
    A = random_hermitian(rng, TRIPARTITE)
    B = random_hermitian(rng, TRIPARTITE)
    P = random_psd(rng, TRIPARTITE, rank=3)
    TA = trace_and_replace(A, labels)
    # idempotent, trace preserving, self-adjoint, positive, linear
    assert trace_and_replace(TA, labels).allclose(TA, atol=1e-12)
    assert TA.trace() == pytest.approx(A.trace(), abs=1e-10)
    assert hs_inner(TA, B) == pytest.approx(hs_inner(A, trace_and_replace(B, labels)), abs=1e-9)
    assert min_eigenvalue(trace_and_replace(P, labels)) >= -1e-10
    lin = trace_and_replace(A * 2.0 + B, labels)
    assert lin.allclose(TA * 2.0 + trace_and_replace(B, labels), atol=1e-12)


@pytest.mark.parametrize("eta1, eta2, psd", [(0.6, 0.8, True), (1 / np.sqrt(2), 1 / np.sqrt(2), True), (0.8, 0.8, False), (0, 0, True)])
def test_min_eigenvalue_disk(eta1, eta2, psd):
    W = pauli.operator(BIPARTITE, {"1111": 0.25, "1ZZ1": eta1 / 4, "Z1XZ": eta2 / 4})
    assert is_psd(W) is psd
    assert min_eigenvalue(W) == pytest.approx((1 - np.hypot(eta1, eta2)) / 4, abs=1e-12)


def test_min_eigenvalue_trivial():
    assert min_eigenvalue(Operator.identity(BIPARTITE)) == pytest.approx(1.0)
    assert min_eigenvalue(pauli.pauli_string_matrix(ONE, "Z")) == pytest.approx(-1.0)


def test_hs_inner_identity():
    assert hs_inner(Operator.identity(BIPARTITE), Operator.identity(BIPARTITE)) == 16


def test_hs_inner_layout_mismatch():
    with pytest.raises(ValueError):
        hs_inner(Operator.identity(BIPARTITE), Operator.identity(TRIPARTITE))


def test_operator_immutable_and_picklable():
    import pickle

    op = pauli.operator(BIPARTITE, {"1ZZ1": 0.5})
    with pytest.raises(AttributeError):
        op.matrix = None
    back = pickle.loads(pickle.dumps(op))
    assert back.allclose(op, atol=0) and back._pauli == op._pauli
