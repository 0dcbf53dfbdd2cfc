"""Concrete process matrices: the two-parameter bipartite family, the quantum
switch and its noisy counterparts."""

from __future__ import annotations

import dataclasses

import numpy as np

from .. import pauli
from ..spaces import BI, TRI, CausalOrder, ProcessMatrix
from ..tensor import (
    BIPARTITE,
    SWITCH_PURE,
    TRIPARTITE,
    Operator,
    as_operator,
    partial_trace,
    permute_systems,
    trace_and_replace,
)

KET0 = np.array([1, 0], dtype=complex)
KET1 = np.array([0, 1], dtype=complex)
PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)


def make_W_etas(eta1: float, eta2: float) -> ProcessMatrix:
    """``(1 + eta1 1ZZ1 + eta2 Z1XZ) / 4``; a valid process iff ``eta1^2 + eta2^2 <= 1``."""
    return ProcessMatrix(pauli.operator(BIPARTITE, {"1111": 0.25, "1ZZ1": eta1 / 4, "Z1XZ": eta2 / 4}))


@dataclasses.dataclass(frozen=True)
class SeparableDecomposition:
    weights: tuple[float, float]
    components: tuple[Operator, Operator]
    orders: tuple[CausalOrder, CausalOrder]

    def total(self) -> Operator:
        return self.components[0] * self.weights[0] + self.components[1] * self.weights[1]


def make_sep_decomposition_etas(eta1: float, eta2: float) -> SeparableDecomposition:
    """Convex split of ``W_{eta1,eta2}`` into an A-first and a B-first term.

    The components are PSD exactly when ``|eta1| + |eta2| <= 1``.
    """
    total = abs(eta1) + abs(eta2)
    if total <= 0:
        raise ValueError("need |eta1| + |eta2| > 0")
    first = pauli.operator(BIPARTITE, {"1111": 0.25, "1ZZ1": np.sign(eta1) * total / 4})
    second = pauli.operator(BIPARTITE, {"1111": 0.25, "Z1XZ": np.sign(eta2) * total / 4})
    return SeparableDecomposition(
        (abs(eta1) / total, abs(eta2) / total), (first, second), (CausalOrder.A_B, CausalOrder.B_A)
    )


def _state(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    if psi.shape != (2,):
        raise ValueError("target state must be a qubit vector")
    norm = np.linalg.norm(psi)
    if norm == 0:
        raise ValueError("target state must be nonzero")
    return psi / norm


def switch_vector(psi=KET0, sign: int = +1) -> np.ndarray:
    """Pure process vector on A_I A_O B_I B_O C_I T_I."""
    psi = _state(psi)
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    d = np.eye(2)
    # A first: psi -> A_I, A_O -> B_I, B_O -> T_I, control |0>
    a_first = np.einsum("a,ob,ct,k->aobckt", psi, d, d, KET0)
    # B first: psi -> B_I, B_O -> A_I, A_O -> T_I, control |1>
    b_first = np.einsum("b,ca,ot,k->aobckt", psi, d, d, KET1)
    return ((a_first + sign * b_first) / np.sqrt(2)).reshape(-1)


def make_switch(psi=KET0, sign: int = +1) -> ProcessMatrix:
    w = switch_vector(psi, sign)
    pure = Operator(SWITCH_PURE, np.outer(w, w.conj()))
    return ProcessMatrix(partial_trace(pure, ["T_I"]))


def _projector(v) -> np.ndarray:
    return np.outer(v, np.conj(v))


def make_noise(kind: str, psi=KET0) -> ProcessMatrix:
    """``white``: maximally mixed inputs; ``depol``: switch with the control
    replaced by the maximally mixed state; ``deph``: switch with a dephased
    control (a classical mixture of the two fixed orders)."""
    if kind == "white":
        return ProcessMatrix(TRI.white_noise())
    if kind == "depol":
        return ProcessMatrix(trace_and_replace(make_switch(psi).op, ["C_I"]))
    if kind == "deph":
        psi = _state(psi)
        phi = np.eye(2).reshape(-1)
        ket = _projector(psi)
        link = _projector(phi)
        one = np.eye(2)
        # A first on A_I (A_O B_I) B_O C_I
        a_first = np.kron(np.kron(np.kron(ket, link), one), _projector(KET0))
        # B first: psi on B_I, link B_O -> A_I, identity on A_O; factors built as B_I (B_O A_I) A_O C_I
        b_raw = np.kron(np.kron(np.kron(ket, link), one), _projector(KET1))
        # factor order of b_raw is B_I, B_O, A_I, A_O, C_I; move to A_I, A_O, B_I, B_O, C_I
        b_first = permute_systems(b_raw, [2] * 5, [2, 3, 0, 1, 4])
        return ProcessMatrix(Operator(TRIPARTITE, 0.5 * (a_first + b_first)))
    raise ValueError(f"unknown noise kind {kind!r}; choose white, depol or deph")


def mixture(target, noise, v: float) -> ProcessMatrix:
    """``v target + (1 - v) noise``."""
    t, n = as_operator(target), as_operator(noise)
    return ProcessMatrix(t * v + n * (1 - v))


def white_noise(kind: str = "tri") -> ProcessMatrix:
    return ProcessMatrix((TRI if kind == "tri" else BI).white_noise())
