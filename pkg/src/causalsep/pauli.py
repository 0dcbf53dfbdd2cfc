"""Real expansions of Hermitian operators over tensor products of 1, X, Y, Z.

Pauli strings are written as one symbol of ``"1XYZ"`` per subsystem in layout
order, e.g. ``"1ZZ1"``. Internally a string on n qubits is an integer whose
base-4 digits (most significant first) are the symbol indices.
"""

from __future__ import annotations

import dataclasses
import functools
from typing import Mapping

import numpy as np
import scipy.sparse as sps

from .tensor import Operator, SystemLayout, as_operator, kron

SYMBOLS = "1XYZ"

SINGLE = {
    "1": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

_X_BIT = np.array([0, 1, 1, 0])
_Z_BIT = np.array([0, 0, 1, 1])


def _require_qubits(layout: SystemLayout):
    if not layout.is_qubit:
        raise ValueError(f"Pauli expansion needs an all-qubit layout, got dims {layout.dims}")


def _normalise_string(string) -> str:
    s = "".join(string)
    s = s.replace("I", "1")
    bad = set(s) - set(SYMBOLS)
    if bad:
        raise ValueError(f"invalid Pauli symbols {sorted(bad)} in {string!r}")
    return s


def string_index(string: str) -> int:
    idx = 0
    for ch in _normalise_string(string):
        idx = 4 * idx + SYMBOLS.index(ch)
    return idx


def index_string(index: int, n: int) -> str:
    out = []
    for _ in range(n):
        index, r = divmod(index, 4)
        out.append(SYMBOLS[r])
    return "".join(reversed(out))


@functools.lru_cache(maxsize=None)
def string_digits(n: int) -> np.ndarray:
    """Symbol index of every subsystem for all ``4**n`` strings, shape (4**n, n)."""
    idx = np.arange(4**n)
    powers = 4 ** np.arange(n - 1, -1, -1)
    digits = (idx[:, None] // powers[None, :]) % 4
    digits.flags.writeable = False
    return digits


@functools.lru_cache(maxsize=None)
def _tables(n: int):
    """Bit masks, Y counts and the (strings x D) column/phase tables."""
    digits = string_digits(n)
    weights = 1 << np.arange(n - 1, -1, -1)
    xmask = (_X_BIT[digits] * weights).sum(axis=1)
    zmask = (_Z_BIT[digits] * weights).sum(axis=1)
    ny = (digits == 2).sum(axis=1)
    rows = np.arange(2**n)
    cols = rows[None, :] ^ xmask[:, None]
    anded = rows[None, :] & zmask[:, None]
    parity = np.zeros_like(anded)
    for bit in range(n):
        parity ^= (anded >> bit) & 1
    # <k| P |k ^ x> = (-i)^{#Y} (-1)^{popcount(k & z)}
    phase = ((-1j) ** ny)[:, None] * (1 - 2 * parity)
    for arr in (cols, phase):
        arr.flags.writeable = False
    return cols, phase


def pauli_string_matrix(layout: SystemLayout, string) -> Operator:
    """Kronecker product of the named single-qubit operators in layout order."""
    _require_qubits(layout)
    s = _normalise_string(string)
    if len(s) != len(layout):
        raise ValueError(f"string {s!r} has {len(s)} symbols for {len(layout)} subsystems")
    return Operator(layout, kron(*(SINGLE[ch] for ch in s)))


@dataclasses.dataclass(frozen=True)
class PauliExpansion:
    """Sparse real coefficients over Pauli strings: ``H = sum_s c_s sigma_s``."""

    layout: SystemLayout
    terms: Mapping[str, float]

    def __post_init__(self):
        _require_qubits(self.layout)
        clean = {}
        for s, c in self.terms.items():
            s = _normalise_string(s)
            if len(s) != len(self.layout):
                raise ValueError(f"string {s!r} does not match layout of {len(self.layout)} subsystems")
            if np.iscomplexobj(c) and abs(np.imag(c)) > 0:
                raise ValueError("Pauli coefficients of a Hermitian operator are real")
            clean[s] = clean.get(s, 0.0) + float(np.real(c))
        object.__setattr__(self, "terms", clean)

    def dense(self) -> np.ndarray:
        n = len(self.layout)
        coeffs = np.zeros(4**n)
        for s, c in self.terms.items():
            coeffs[string_index(s)] += c
        return coeffs

    @classmethod
    def from_dense(cls, layout: SystemLayout, coeffs: np.ndarray, cutoff: float = 0.0) -> "PauliExpansion":
        n = len(layout)
        nz = np.flatnonzero(np.abs(coeffs) > cutoff)
        return cls(layout, {index_string(int(i), n): float(coeffs[i]) for i in nz})

    def __getitem__(self, string) -> float:
        return self.terms.get(_normalise_string(string), 0.0)


def pauli_coefficients(H) -> np.ndarray:
    """Dense vector of ``tr[sigma_s H] / D`` over all strings."""
    H = as_operator(H)
    _require_qubits(H.layout)
    n = len(H.layout)
    cols, phase = _tables(n)
    rows = np.arange(2**n)
    # tr[P H] = sum_k P[k, k^x] H[k^x, k]
    vals = (phase * H.matrix[cols, rows[None, :]]).sum(axis=1)
    return vals.real / 2**n


def coefficients_to_matrix(n: int, coeffs: np.ndarray) -> np.ndarray:
    cols, phase = _tables(n)
    d = 2**n
    flat = (np.arange(d)[None, :] * d + cols).ravel()
    out = np.zeros(d * d, dtype=complex)
    np.add.at(out, flat, (np.asarray(coeffs, dtype=float)[:, None] * phase).ravel())
    return out.reshape(d, d)


def to_pauli(H, cutoff: float = 0.0) -> PauliExpansion:
    H = as_operator(H)
    if H._pauli is not None:
        return H._pauli
    return PauliExpansion.from_dense(H.layout, pauli_coefficients(H), cutoff)


def from_pauli(e: PauliExpansion) -> Operator:
    m = coefficients_to_matrix(len(e.layout), e.dense())
    return Operator(e.layout, m, _pauli=e)


def operator(layout: SystemLayout, terms: Mapping[str, float]) -> Operator:
    """Shorthand for ``from_pauli(PauliExpansion(layout, terms))``."""
    return from_pauli(PauliExpansion(layout, terms))


def sparse_strings(n: int, indices) -> sps.csr_matrix:
    """Rows are the row-major flattened matrices of the given strings."""
    indices = np.asarray(indices, dtype=np.int64)
    cols, phase = _tables(n)
    d = 2**n
    flat = np.arange(d)[None, :] * d + cols[indices]
    rowptr = np.arange(len(indices) + 1) * d
    return sps.csr_matrix((phase[indices].ravel(), flat.ravel(), rowptr), shape=(len(indices), d * d))
