"""Choi-Jamiolkowski matrices of qubit unitaries and Pauli-pair expansions."""

from __future__ import annotations

import dataclasses

import numpy as np

from .. import pauli
from ..tensor import Operator, SystemLayout

ONE = np.eye(2, dtype=complex)
GATES = {
    "1": ONE,
    "X": pauli.SINGLE["X"],
    "Y": pauli.SINGLE["Y"],
    "Z": pauli.SINGLE["Z"],
    "P": np.diag([1, 1j]),
    "H": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
}


def gate(name: str) -> np.ndarray:
    """Product of named gates, left to right: ``"HPX"`` is ``H @ P @ X``."""
    out = ONE
    for ch in name:
        out = out @ GATES[ch]
    return out


def _local_layout(party: str) -> SystemLayout:
    return SystemLayout.of((f"{party}_I", 2, party), (f"{party}_O", 2, party))


@dataclasses.dataclass(frozen=True)
class UnitaryCJ:
    unitary: np.ndarray
    cj: Operator
    label: str = ""


def cj_of_unitary(U, party: str = "A", label: str = "") -> UnitaryCJ:
    """``M_U = [(1 kron U) |1>><<1| (1 kron U^dag)]^T`` on ``X_I X_O``."""
    U = np.asarray(U, dtype=complex)
    d = U.shape[0]
    if U.shape != (d, d) or not np.allclose(U.conj().T @ U, np.eye(d), atol=1e-12):
        raise ValueError("expected a square unitary matrix")
    if d != 2:
        raise ValueError("only qubit unitaries are supported")
    ket = np.eye(d).reshape(-1)
    v = np.kron(np.eye(d), U) @ ket
    M = np.outer(v, v.conj()).T
    return UnitaryCJ(U, Operator(_local_layout(party), M), label)


# sigma_I kron sigma_O = 1/2 sum_k c_k M_{U_k}
PAIR_TABLE: dict[str, tuple[tuple[float, str], ...]] = {
    "11": ((1, "1"), (1, "X"), (1, "Y"), (1, "Z")),
    "XX": ((1, "1"), (1, "X"), (-1, "Y"), (-1, "Z")),
    "YY": ((-1, "1"), (1, "X"), (-1, "Y"), (1, "Z")),
    "ZZ": ((1, "1"), (-1, "X"), (-1, "Y"), (1, "Z")),
    "XY": ((-1, "P"), (-1, "PX"), (1, "PY"), (1, "PZ")),
    "YX": ((-1, "P"), (1, "PX"), (-1, "PY"), (1, "PZ")),
    "XZ": ((1, "H"), (1, "HX"), (-1, "HY"), (-1, "HZ")),
    "ZX": ((1, "H"), (-1, "HX"), (-1, "HY"), (1, "HZ")),
    "YZ": ((-1, "HP"), (1, "HPX"), (-1, "HPY"), (1, "HPZ")),
    "ZY": ((-1, "PH"), (1, "PHX"), (1, "PHY"), (-1, "PHZ")),
}


def pauli_pair_to_unitary_mix(pair: str, party: str = "A") -> list[tuple[float, UnitaryCJ]]:
    """Signed combination of unitary CJ matrices equal to ``sigma_I kron sigma_O``.

    Only pairs where both factors are the identity or both are nontrivial
    admit such a combination; ``"X1"`` and friends raise ``ValueError``.
    """
    key = pauli._normalise_string(pair)
    if len(key) != 2:
        raise ValueError(f"expected two Pauli symbols, got {pair!r}")
    if key not in PAIR_TABLE:
        raise ValueError(f"{pair!r} mixes identity and non-identity factors; no unitary expansion")
    return [(0.5 * c, cj_of_unitary(gate(name), party, name)) for c, name in PAIR_TABLE[key]]


def reassemble(mix: list[tuple[float, UnitaryCJ]]) -> np.ndarray:
    return sum(c * u.cj.matrix for c, u in mix)
