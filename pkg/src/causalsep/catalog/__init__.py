"""Named processes and witnesses used throughout the package."""

from __future__ import annotations

import dataclasses
from typing import Any, Callable

import numpy as np

from ..spaces import ProcessMatrix
from ..witness import Witness
from .processes import (
    KET0,
    KET1,
    PLUS,
    SeparableDecomposition,
    make_noise,
    make_sep_decomposition_etas,
    make_switch,
    make_W_etas,
    mixture,
    switch_vector,
    white_noise,
)
from .unitaries import GATES, PAIR_TABLE, UnitaryCJ, cj_of_unitary, gate, pauli_pair_to_unitary_mix, reassemble
from .witnesses import (
    TermTable,
    load_table,
    make_S_etas,
    make_S_family,
    make_S_switch,
    make_S_tilde,
    s_family_coefficients,
)

STATES = {"0": KET0, "1": KET1, "+": PLUS}

#: verification tolerance per entry; tables carry four decimals
ANALYTIC_TOL = 1e-9
TABLE_TOL = 5e-3
_TABULATED = {"s-switch", "s-tilde"}


@dataclasses.dataclass(frozen=True)
class CatalogEntry:
    name: str
    params: dict[str, Any]
    obj: ProcessMatrix | Witness
    note: str

    @property
    def is_witness(self) -> bool:
        return isinstance(self.obj, Witness)

    @property
    def op(self):
        return self.obj.op

    @property
    def tolerance(self) -> float:
        return TABLE_TOL if self.name in _TABULATED else ANALYTIC_TOL


def _psi(params) -> np.ndarray:
    return STATES[str(params.get("psi", "0"))]


_BUILDERS: dict[str, tuple[Callable[[dict], Any], dict[str, Any], str]] = {
    "w-etas": (lambda p: make_W_etas(float(p["eta1"]), float(p["eta2"])),
               {"eta1": 1 / np.sqrt(2), "eta2": 1 / np.sqrt(2)}, "bipartite two-parameter family"),
    "s-etas": (lambda p: make_S_etas(float(p["eta1"]), float(p["eta2"])),
               {"eta1": 1 / np.sqrt(2), "eta2": 1 / np.sqrt(2)}, "witness for the bipartite family"),
    "switch": (lambda p: make_switch(_psi(p), +1), {"psi": "0"}, "quantum switch"),
    "switch-minus": (lambda p: make_switch(_psi(p), -1), {"psi": "0"}, "quantum switch, relative minus sign"),
    "white": (lambda p: make_noise("white"), {}, "white noise on the tripartite scenario"),
    "depol": (lambda p: make_noise("depol", _psi(p)), {"psi": "0"}, "switch with depolarised control"),
    "deph": (lambda p: make_noise("deph", _psi(p)), {"psi": "0"}, "switch with dephased control"),
    "s-switch": (lambda p: make_S_switch(), {}, "tabulated white-noise witness of the switch (4 decimals)"),
    "s-family": (lambda p: make_S_family(float(p["v"])), {"v": 1.0}, "analytic witness family S(v)"),
    "s-tilde": (lambda p: make_S_tilde(), {}, "tabulated unitary-restricted witness (4 decimals)"),
}

NAMES = tuple(_BUILDERS)


def build(name: str, **params) -> CatalogEntry:
    """Construct a catalog entry by name; unknown parameters are rejected."""
    if name not in _BUILDERS:
        raise KeyError(f"unknown catalog entry {name!r}; available: {', '.join(NAMES)}")
    fn, defaults, note = _BUILDERS[name]
    unknown = set(params) - set(defaults)
    if unknown:
        raise ValueError(f"{name} takes parameters {sorted(defaults)}, got {sorted(unknown)}")
    full = {**defaults, **params}
    if "psi" in full and str(full["psi"]) not in STATES:
        raise ValueError(f"psi must be one of {sorted(STATES)}")
    return CatalogEntry(name, full, fn(full), note)


__all__ = [
    "CatalogEntry", "NAMES", "ANALYTIC_TOL", "TABLE_TOL", "STATES", "build", "GATES", "PAIR_TABLE", "UnitaryCJ", "cj_of_unitary", "gate",
    "pauli_pair_to_unitary_mix", "reassemble", "SeparableDecomposition", "make_noise",
    "make_sep_decomposition_etas", "make_switch", "make_W_etas", "mixture", "switch_vector", "white_noise",
    "TermTable", "load_table", "make_S_etas", "make_S_family", "make_S_switch", "make_S_tilde",
    "s_family_coefficients", "KET0", "KET1", "PLUS",
]
