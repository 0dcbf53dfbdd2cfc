"""Catalog witnesses: analytic families and the tabulated switch witnesses."""

from __future__ import annotations

import dataclasses
import functools
from importlib import resources

import numpy as np
import yaml

from .. import pauli
from ..spaces import CausalOrder, swap_parties
from ..tensor import BIPARTITE, TRIPARTITE, Operator
from ..witness import CertificatePart, Witness


def make_S_etas(eta1: float, eta2: float) -> Witness:
    """``(1 - sgn(eta1) 1ZZ1 - sgn(eta2) Z1XZ) / 4``, certified with ``S^P = S``."""
    S = pauli.operator(
        BIPARTITE, {"1111": 0.25, "1ZZ1": -np.sign(eta1) / 4, "Z1XZ": -np.sign(eta2) / 4}
    )
    return Witness(S, (CertificatePart(None, S, Operator.zeros(BIPARTITE)),), name="s-etas")


@dataclasses.dataclass(frozen=True)
class TermTable:
    """``S = (1 + sum_i s_i S_i) / 4`` and ``S_perp = sum_j t_j T_j / 4``."""

    s_terms: tuple[tuple[tuple[int, str], ...], ...]
    t_terms: tuple[tuple[tuple[int, str], ...], ...]
    s: np.ndarray
    t: np.ndarray
    expected_value: float | None = None

    def operator(self, coeffs, terms, identity: float) -> Operator:
        acc: dict[str, float] = {"11111": identity}
        for c, group in zip(coeffs, terms):
            for sign, string in group:
                acc[string] = acc.get(string, 0.0) + sign * c / 4
        return pauli.operator(TRIPARTITE, acc)

    def witness_operator(self, s=None) -> Operator:
        return self.operator(self.s if s is None else s, self.s_terms, 0.25)

    def orthogonal_part(self, t=None) -> Operator:
        return self.operator(self.t if t is None else t, self.t_terms, 0.0)


def _parse_group(group) -> tuple[tuple[int, str], ...]:
    out = []
    for item in group:
        item = str(item)
        sign = -1 if item.startswith("-") else 1
        out.append((sign, pauli._normalise_string(item.lstrip("+-"))))
    return tuple(out)


@functools.lru_cache(maxsize=None)
def load_table(name: str) -> TermTable:
    """Read ``data/<name>.yaml``."""
    text = resources.files(__package__).joinpath("data", f"{name}.yaml").read_text()
    raw = yaml.safe_load(text)
    if tuple(raw["layout"]) != TRIPARTITE.labels:
        raise ValueError(f"table {name} uses layout {raw['layout']}")
    s = np.array([float(c) for c, _ in raw["s"]])
    t = np.array([float(c) for c, _ in raw["t"]])
    return TermTable(
        tuple(_parse_group(g) for _, g in raw["s"]),
        tuple(_parse_group(g) for _, g in raw["t"]),
        s,
        t,
        raw.get("expected_value_on_switch"),
    )


def _symmetric_certificate(S: Operator, perp_abc: Operator) -> tuple[CertificatePart, CertificatePart]:
    """A-first split from the table and its Alice/Bob mirror image."""
    pos_abc = S - perp_abc
    return (
        CertificatePart(CausalOrder.A_B_C, pos_abc, perp_abc),
        CertificatePart(CausalOrder.B_A_C, swap_parties(pos_abc), swap_parties(perp_abc)),
    )


def _from_table(table: TermTable, name: str, s=None, t=None) -> Witness:
    S = table.witness_operator(s)
    perp = table.orthogonal_part(t)
    # the mirrored split reassembles to swap(S); for symmetric S that is S itself
    return Witness(S, _symmetric_certificate(S, perp), name=name)


def make_S_switch() -> Witness:
    return _from_table(load_table("s_switch"), "s-switch")


def make_S_tilde() -> Witness:
    return _from_table(load_table("s_tilde"), "s-tilde")


def s_family_coefficients(v: float) -> tuple[np.ndarray, np.ndarray]:
    a = 1 - v**2 / 4
    s = np.zeros(12)
    s[[0, 1]] = 1
    s[[2, 3]] = -a
    s[[4, 5, 7]] = v**2 / 4
    s[8] = -v / 2
    t = np.zeros(13)
    t[[5, 6, 8, 9]] = 1
    t[[0, 2]] = a
    t[[1, 3]] = -a
    t[[4, 7]] = -2 * a
    return s, t


def make_S_family(v: float) -> Witness:
    """Witness family that detects the switch mixed with its depolarised or
    dephased counterpart at weight ``v``; built on the switch term table."""
    s, t = s_family_coefficients(v)
    return _from_table(load_table("s_switch"), f"s-family(v={v:g})", s, t)
