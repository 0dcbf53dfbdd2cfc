"""Validity subspaces and causal-order cones.

Two scenarios are supported: bipartite (A_I A_O B_I B_O) and tripartite with
a third party that only has an input (A_I A_O B_I B_O C_I). All projectors are
linear combinations of trace-and-replace maps; these act diagonally on Pauli
strings, so each projector is also a keep/kill predicate on strings.
"""

from __future__ import annotations

import dataclasses
import enum
import functools

import numpy as np

from . import pauli
from .config import TOL
from .tensor import BIPARTITE, TRIPARTITE, Operator, Replace, SystemLayout, as_operator, is_psd, min_eigenvalue, permute_systems


class Kind(enum.Enum):
    BIPARTITE = "bi"
    TRIPARTITE = "tri"


class CausalOrder(enum.Enum):
    A_B = "A<B"
    B_A = "B<A"
    A_B_C = "A<B<C"
    B_A_C = "B<A<C"

    @property
    def kind(self) -> Kind:
        return Kind.BIPARTITE if self in (CausalOrder.A_B, CausalOrder.B_A) else Kind.TRIPARTITE


@dataclasses.dataclass(frozen=True)
class Scenario:
    kind: Kind
    layout: SystemLayout

    def __post_init__(self):
        need = ("A_I", "A_O", "B_I", "B_O") + (("C_I",) if self.kind is Kind.TRIPARTITE else ())
        if self.layout.labels != need:
            raise ValueError(f"{self.kind.name.lower()} scenario needs subsystems {need}, got {self.layout.labels}")

    @classmethod
    def of(cls, layout: SystemLayout) -> "Scenario":
        kind = Kind.TRIPARTITE if "C_I" in layout.labels else Kind.BIPARTITE
        return cls(kind, layout)

    @property
    def d_in(self) -> int:
        return self.layout.dim_of(lab for lab in self.layout.labels if lab.endswith("_I"))

    @property
    def d_out(self) -> int:
        return self.layout.dim_of(("A_O", "B_O"))

    @property
    def orders(self) -> tuple[CausalOrder, CausalOrder]:
        if self.kind is Kind.BIPARTITE:
            return CausalOrder.A_B, CausalOrder.B_A
        return CausalOrder.A_B_C, CausalOrder.B_A_C

    def white_noise(self) -> Operator:
        """The process ``1 / d_I`` that feeds maximally mixed states to every input."""
        return Operator(self.layout, np.eye(self.layout.dim) / self.d_in)


BI = Scenario(Kind.BIPARTITE, BIPARTITE)
TRI = Scenario(Kind.TRIPARTITE, TRIPARTITE)


@dataclasses.dataclass(frozen=True)
class ProcessMatrix:
    op: Operator
    normalized: bool = True

    @property
    def scenario(self) -> Scenario:
        return Scenario.of(self.op.layout)

    @property
    def layout(self) -> SystemLayout:
        return self.op.layout

    @property
    def matrix(self) -> np.ndarray:
        return self.op.matrix


def scenario_of(H) -> Scenario:
    return Scenario.of(as_operator(H).layout)


# --- projector expressions -------------------------------------------------

_1 = Replace.one()
A_I, A_O, B_I, B_O, C_I = (Replace.on(lab) for lab in ("A_I", "A_O", "B_I", "B_O", "C_I"))


@functools.lru_cache(maxsize=None)
def validity_expr(kind: Kind) -> Replace:
    if kind is Kind.BIPARTITE:
        return _1 - (1 - B_O) * A_I * A_O - (1 - A_O) * B_I * B_O - (1 - A_O) * (1 - B_O)
    return _1 - (1 - B_O) * A_I * A_O * C_I - (1 - A_O) * B_I * B_O * C_I - (1 - A_O) * (1 - B_O) * C_I


@functools.lru_cache(maxsize=None)
def order_expr(order: CausalOrder) -> Replace:
    if order is CausalOrder.A_B:
        return _1 - (1 - B_O) - (1 - A_O) * B_I * B_O
    if order is CausalOrder.B_A:
        return _1 - (1 - A_O) - (1 - B_O) * A_I * A_O
    if order is CausalOrder.A_B_C:
        return _1 - (1 - B_O) * C_I - (1 - A_O) * B_I * B_O * C_I
    return _1 - (1 - A_O) * C_I - (1 - B_O) * A_I * A_O * C_I


@functools.lru_cache(maxsize=None)
def split_expr(order: CausalOrder) -> Replace:
    """Projector onto the single constraint that, inside the validity subspace, fixes the order.

    For A before B this is ``{W : [1-B_O](C_I) W = 0}``; it is what the
    primal robustness problem imposes on each component.
    """
    first_is_a = order in (CausalOrder.A_B, CausalOrder.A_B_C)
    out = B_O if first_is_a else A_O
    kill = (1 - out) * C_I if order.kind is Kind.TRIPARTITE else (1 - out)
    return _1 - kill


def _mask(expr: Replace, layout: SystemLayout) -> np.ndarray:
    diag = expr.pauli_diagonal(layout)
    if not np.all(np.isclose(diag, 0) | np.isclose(diag, 1)):
        raise AssertionError("expression is not a Pauli-diagonal projector")
    return np.isclose(diag, 1)


@functools.lru_cache(maxsize=None)
def kept_strings(expr_key: str, kind: Kind) -> np.ndarray:
    """Boolean mask over Pauli strings kept by a named projector."""
    layout = TRIPARTITE if kind is Kind.TRIPARTITE else BIPARTITE
    if expr_key == "valid":
        expr = validity_expr(kind)
    elif expr_key.startswith("split:"):
        expr = split_expr(CausalOrder(expr_key[6:]))
    else:
        expr = order_expr(CausalOrder(expr_key))
    m = _mask(expr, layout)
    m.flags.writeable = False
    return m


def _apply_mask(H: Operator, mask: np.ndarray) -> Operator:
    coeffs = pauli.pauli_coefficients(H)
    return Operator(H.layout, pauli.coefficients_to_matrix(len(H.layout), coeffs * mask))


def _check_layout(H: Operator, kind: Kind | None = None) -> Scenario:
    sc = Scenario.of(H.layout)
    if kind is not None and sc.kind is not kind:
        raise ValueError(f"operator layout is {sc.kind.name.lower()}, expected {kind.name.lower()}")
    return sc


def project_valid(H, scenario: Scenario | None = None, *, method: str = "pauli") -> Operator:
    """Orthogonal projection onto the linear validity subspace.

    ``method="replace"`` evaluates the trace-and-replace formula on the dense
    matrix instead of the Pauli keep/kill rule; the two agree and the slower
    one is kept as a cross-check.
    """
    H = as_operator(H)
    sc = _check_layout(H, scenario.kind if scenario is not None else None)
    if method == "replace":
        return validity_expr(sc.kind)(H)
    return _apply_mask(H, kept_strings("valid", sc.kind))


def project_order(H, order: CausalOrder, *, method: str = "pauli") -> Operator:
    """Projection onto the linear subspace of the given causal order."""
    H = as_operator(H)
    _check_layout(H, order.kind)
    if method == "replace":
        return order_expr(order)(H)
    return _apply_mask(H, kept_strings(order.value, order.kind))


@dataclasses.dataclass
class ValidityReport:
    residuals: dict[str, float]
    min_eigenvalue: float
    trace: float
    d_out: int
    psd: bool
    normalized: bool | None
    valid: bool

    def to_json(self) -> dict:
        return dataclasses.asdict(self)


def _validity_conditions(kind: Kind) -> dict[str, Replace]:
    c = C_I if kind is Kind.TRIPARTITE else _1
    return {
        "[1-B_O]A_IA_O" + ("C_I" if kind is Kind.TRIPARTITE else ""): (1 - B_O) * A_I * A_O * c,
        "[1-A_O]B_IB_O" + ("C_I" if kind is Kind.TRIPARTITE else ""): (1 - A_O) * B_I * B_O * c,
        "[1-A_O][1-B_O]" + ("C_I" if kind is Kind.TRIPARTITE else ""): (1 - A_O) * (1 - B_O) * c,
    }


def is_valid_process(H, scenario: Scenario | None = None, tol: float | None = None, normalized: bool = False) -> ValidityReport:
    """Check the linear validity conditions, positivity and (optionally) ``tr W = d_O``."""
    H = as_operator(H)
    sc = _check_layout(H, scenario.kind if scenario is not None else None)
    sub_tol = TOL.subspace if tol is None else tol
    residuals = {name: expr(H).norm() for name, expr in _validity_conditions(sc.kind).items()}
    lam = min_eigenvalue(H)
    psd = is_psd(H, tol)
    tr = H.trace()
    norm_ok = abs(tr - sc.d_out) <= max(sub_tol, 1e-9) * sc.d_out if normalized else None
    valid = psd and all(r <= sub_tol for r in residuals.values()) and (norm_ok is not False)
    return ValidityReport(residuals, lam, tr, sc.d_out, psd, norm_ok, valid)


def is_in_order_cone(W, order: CausalOrder, tol: float | None = None) -> bool:
    """Membership of a nonnormalised matrix in the cone of the given order."""
    W = as_operator(W)
    _check_layout(W, order.kind)
    sub_tol = TOL.subspace if tol is None else tol
    residual = (W - project_order(W, order)).norm()
    return residual <= sub_tol and is_psd(W, tol)


# --- party swap ------------------------------------------------------------

_SIGN_FLIP = np.array([1, 1, -1, -1])  # 1, X keep sign; Y, Z flip


def swap_parties(H, *, method: str = "matrix") -> Operator:
    """Exchange Alice and Bob in a tripartite operator.

    Pauli terms are relabelled A <-> B and pick up a minus sign when the C_I
    factor is Y or Z. Equivalently: permute the subsystems and conjugate
    C_I by X.
    """
    H = as_operator(H)
    _check_layout(H, Kind.TRIPARTITE)
    if method == "pauli":
        n = 5
        digits = pauli.string_digits(n)
        coeffs = pauli.pauli_coefficients(H)
        swapped = digits[:, [2, 3, 0, 1, 4]]
        target = (swapped * (4 ** np.arange(n - 1, -1, -1))).sum(axis=1)
        out = np.zeros_like(coeffs)
        out[target] = coeffs * _SIGN_FLIP[digits[:, 4]]
        return Operator(H.layout, pauli.coefficients_to_matrix(n, out))
    m = permute_systems(H.matrix, H.layout.dims, [2, 3, 0, 1, 4])
    xc = np.kron(np.eye(16), pauli.SINGLE["X"])
    return Operator(H.layout, xc @ m @ xc)
