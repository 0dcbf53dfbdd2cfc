"""Random robustness, witnesses of causal nonseparability and their checks.

Every unknown operator is parametrised by real Pauli coefficients on the
strings its subspace allows, so the linear subspace constraints disappear
from the programs and only PSD blocks and a few equalities remain.
"""

from __future__ import annotations

import dataclasses
import logging
import warnings
from typing import Sequence

import numpy as np
import scipy.sparse as sps

from . import pauli
from .conic import ConicProgram, PSDBlock, SolveResult, solve
from .spaces import CausalOrder, Kind, Scenario, is_in_order_cone, kept_strings, project_order, project_valid
from .tensor import Operator, Replace, SystemLayout, as_operator, hs_inner, min_eigenvalue
from .witness import CertificatePart, Witness

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-8


class SolverError(RuntimeError):
    def __init__(self, message: str, result: SolveResult | None = None):
        super().__init__(message)
        self.result = result


class BoundaryNoiseWarning(UserWarning):
    """The noise process is not in the interior of the separable set."""


# --- helpers ---------------------------------------------------------------


def _n_qubits(scenario: Scenario) -> int:
    return len(scenario.layout)


def _strings(n: int, mask: np.ndarray) -> np.ndarray:
    return np.flatnonzero(mask)


def _rows(n: int, basis: sps.spmatrix) -> sps.csr_matrix:
    """Flattened matrices ``sum_s basis[s, k] sigma_s`` as rows ``k``."""
    return sps.csr_matrix(basis.T @ pauli.sparse_strings(n, np.arange(4**n)))


def _selection(n: int, idx: np.ndarray) -> sps.csr_matrix:
    """Basis matrix (strings x variables) selecting the given strings."""
    return sps.csr_matrix((np.ones(len(idx)), (idx, np.arange(len(idx)))), shape=(4**n, len(idx)))


def _reduced_rows(n: int, idx: np.ndarray, drop: int) -> tuple[sps.csr_matrix, np.ndarray]:
    """Rows of ``sigma_s`` with qubit ``drop`` removed, for strings that are identity there."""
    digits = pauli.string_digits(n)
    keep = digits[idx, drop] == 0
    sub = np.delete(digits[idx[keep]], drop, axis=1)
    red_idx = (sub * (4 ** np.arange(n - 2, -1, -1))).sum(axis=1)
    rows = pauli.sparse_strings(n - 1, red_idx)
    return rows, keep


class _Builder:
    """Accumulates variables, PSD blocks and equalities of a program."""

    def __init__(self):
        self.sizes: list[int] = []
        self.names: list[str] = []
        self.blocks: list[tuple[np.ndarray, list[tuple[int, sps.spmatrix]]]] = []
        self.eq_rows: list[tuple[list[tuple[int, np.ndarray]], float]] = []
        self.cost: dict[int, np.ndarray] = {}

    def var(self, name: str, size: int) -> int:
        self.sizes.append(size)
        self.names.append(name)
        return len(self.sizes) - 1

    def offset(self, g: int) -> int:
        return int(sum(self.sizes[:g]))

    def block(self, constant: np.ndarray, terms: list[tuple[int, sps.spmatrix]]):
        self.blocks.append((np.asarray(constant), terms))

    def equality(self, terms: list[tuple[int, np.ndarray]], rhs: float):
        self.eq_rows.append((terms, rhs))

    def objective(self, g: int, c: np.ndarray):
        self.cost[g] = np.asarray(c, dtype=float)

    def build(self) -> ConicProgram:
        n = int(sum(self.sizes))
        c = np.zeros(n)
        for g, v in self.cost.items():
            c[self.offset(g): self.offset(g) + self.sizes[g]] = v
        blocks = []
        for const, terms in self.blocks:
            d2 = const.size
            parts = []
            for g in range(len(self.sizes)):
                mats = [m for gg, m in terms if gg == g]
                if mats:
                    parts.append(sps.csr_matrix(sum(mats)))
                else:
                    parts.append(sps.csr_matrix((self.sizes[g], d2)))
            blocks.append(PSDBlock(const, sps.vstack(parts).tocsr()))
        A = np.zeros((len(self.eq_rows), n))
        b = np.zeros(len(self.eq_rows))
        for i, (terms, rhs) in enumerate(self.eq_rows):
            for g, v in terms:
                A[i, self.offset(g): self.offset(g) + self.sizes[g]] += v
            b[i] = rhs
        names = [f"{nm}[{k}]" for nm, sz in zip(self.names, self.sizes) for k in range(sz)]
        return ConicProgram(n, c, blocks, A if len(b) else None, b if len(b) else None, names)

    def split(self, x: np.ndarray) -> list[np.ndarray]:
        out, o = [], 0
        for sz in self.sizes:
            out.append(x[o: o + sz])
            o += sz
        return out


def _check_solved(res: SolveResult, what: str):
    if not res.ok:
        raise SolverError(f"{what}: solver returned {res.status.value} ({res.message})", res)


def _is_white(noise: Operator) -> bool:
    sc = Scenario.of(noise.layout)
    return noise.allclose(sc.white_noise(), atol=1e-12)


def _scenario_pair(W, noise) -> tuple[Operator, Operator, Scenario]:
    W = as_operator(W)
    sc = Scenario.of(W.layout)
    N = sc.white_noise() if noise is None or (isinstance(noise, str) and noise == "white") else as_operator(noise)
    if N.layout != W.layout:
        raise ValueError("process and noise live on different layouts")
    return W, N, sc


# --- primal ----------------------------------------------------------------


@dataclasses.dataclass(frozen=True)
class Decomposition:
    """``W + r N = components[0] + components[1]`` with one component per causal order."""

    orders: tuple[CausalOrder, CausalOrder]
    components: tuple[Operator, Operator]

    def total(self) -> Operator:
        return self.components[0] + self.components[1]

    def weights(self) -> tuple[float, float]:
        t = [c.trace() for c in self.components]
        s = sum(t)
        return (t[0] / s, t[1] / s)

    def verify(self, tol: float = 1e-6) -> bool:
        return all(is_in_order_cone(c, o, tol=tol) for c, o in zip(self.components, self.orders))


def _primal_program(W: Operator, N: Operator, sc: Scenario):
    n = _n_qubits(sc)
    o1, o2 = sc.orders
    split1 = kept_strings("split:" + o1.value, sc.kind)
    split2 = kept_strings("split:" + o2.value, sc.kind)
    idx1 = _strings(n, split1)
    w = pauli.pauli_coefficients(W)
    nv = pauli.pauli_coefficients(N)
    rows1 = pauli.sparse_strings(n, idx1)
    Nrow = sps.csr_matrix(N.matrix.reshape(1, -1))
    D = sc.layout.dim

    b = _Builder()
    gr = b.var("r", 1)
    g1 = b.var("w1", len(idx1))
    b.objective(gr, [1.0])
    b.block(np.zeros((D, D)), [(g1, rows1)])
    b.block(W.matrix, [(gr, Nrow), (g1, -rows1)])
    # the second component must be annihilated by the other split constraint
    pos1 = -np.ones(4**n, dtype=int)
    pos1[idx1] = np.arange(len(idx1))
    for s in np.flatnonzero(~split2):
        e1 = np.zeros(len(idx1))
        if pos1[s] >= 0:
            e1[pos1[s]] = -1.0
        if nv[s] == 0 and pos1[s] < 0:
            if abs(w[s]) > 1e-12:
                raise ValueError("process has components outside both order subspaces; is it valid?")
            continue
        b.equality([(gr, np.array([nv[s]])), (g1, e1)], -w[s])
    return b, idx1


def solve_primal(W, noise=None, tol: float = DEFAULT_TOL, backend: str = "builtin"):
    """Minimal ``r`` with ``W + r N`` causally separable, plus the decomposition."""
    W, N, sc = _scenario_pair(W, noise)
    b, idx1 = _primal_program(W, N, sc)
    res = solve(b.build(), tol=tol, backend=backend)
    _check_solved(res, "primal robustness problem")
    r, w1 = b.split(res.x)
    n = _n_qubits(sc)
    coeffs = np.zeros(4**n)
    coeffs[idx1] = w1
    W1 = Operator(sc.layout, pauli.coefficients_to_matrix(n, coeffs))
    W2 = W + N * float(r[0]) - W1
    return float(r[0]), Decomposition(sc.orders, (W1, W2)), res


# --- dual ------------------------------------------------------------------


@dataclasses.dataclass(frozen=True)
class Restriction:
    """Linear restriction of the witness search space.

    ``basis`` is a (strings x k) matrix whose columns span the allowed Pauli
    coefficient vectors of ``S``. ``None`` means the validity subspace.
    """

    name: str
    basis: sps.csr_matrix | None = None

    @property
    def is_none(self) -> bool:
        return self.basis is None


def _mask_basis(mask: np.ndarray) -> sps.csr_matrix:
    n = int(round(np.log(len(mask)) / np.log(4)))
    return _selection(n, np.flatnonzero(mask))


def unitary_restriction_constraints(scenario: Scenario) -> list[tuple[str, Replace]]:
    """Marginal equalities obeyed by witnesses built from unitaries of Alice and Bob.

    Each entry ``(label, E)`` is the condition ``E(S) = 0``; for a party X they
    read ``_{X_I}S = _{X_O}S = _{X_I X_O}S``.
    """
    out = []
    for party in ("A", "B"):
        xi, xo = Replace.on(f"{party}_I"), Replace.on(f"{party}_O")
        both = Replace.on(f"{party}_I", f"{party}_O")
        out.append((f"_{party}_I S = _{party}_O S", xi - xo))
        out.append((f"_{party}_O S = _{party}_I{party}_O S", xo - both))
        out.append((f"_{party}_I S = _{party}_I{party}_O S", xi - both))
    return out


def constraint_residuals(S, constraints: Sequence[tuple[str, Replace]]) -> dict[str, float]:
    S = as_operator(S)
    return {label: E(S).norm() for label, E in constraints}


def marginal_restriction(scenario: Scenario, constraints: Sequence[Replace], name: str = "custom") -> Restriction:
    """Witnesses ``S`` with ``E(S) = 0`` for each trace-and-replace expression ``E``."""
    mask = np.ones(4 ** _n_qubits(scenario), dtype=bool)
    for E in constraints:
        E = E[1] if isinstance(E, tuple) else E
        mask &= np.isclose(E.pauli_diagonal(scenario.layout), 0)
    return Restriction(name, _mask_basis(mask))


def unitary_restriction(scenario: Scenario) -> Restriction:
    return marginal_restriction(scenario, [E for _, E in unitary_restriction_constraints(scenario)], "unitary")


def charlie_basis_restriction(scenario: Scenario, operators: Sequence, base: Restriction | None = None,
                              name: str = "charlie-basis") -> Restriction:
    """Witnesses whose C_I factor lies in the real span of ``operators``.

    The remaining factors are restricted by ``base`` (default: unitary
    operations for Alice and Bob).
    """
    if scenario.kind is not Kind.TRIPARTITE:
        raise ValueError("Charlie restrictions need the tripartite scenario")
    if base is None:
        base = unitary_restriction(scenario)
    one = SystemLayout.of(("C_I", 2, "C"))
    vecs = np.array([pauli.pauli_coefficients(Operator(one, np.asarray(op))) for op in operators]).T
    q, r, _ = np.linalg.svd(vecs, full_matrices=False)
    span = q[:, r > 1e-10 * max(r.max(), 1e-300)]  # 4 x k, orthonormal
    if span.shape[1] == 0:
        raise ValueError("Charlie operators span nothing")
    n = _n_qubits(scenario)
    rest_idx = np.arange(4 ** (n - 1))
    # column (rest, j) -> coefficients span[:, j] on strings rest*4 + c
    rows = (rest_idx[:, None, None] * 4 + np.arange(4)[None, None, :]).repeat(span.shape[1], axis=1)
    vals = np.broadcast_to(span.T[None, :, :], rows.shape)
    cols = np.broadcast_to(np.arange(len(rest_idx) * span.shape[1]).reshape(len(rest_idx), -1)[:, :, None], rows.shape)
    full = sps.csr_matrix((vals.ravel(), (rows.ravel(), cols.ravel())), shape=(4**n, len(rest_idx) * span.shape[1]))
    # intersect with the base restriction: keep columns whose support lies in the base mask
    base_mask = np.asarray(abs(base.basis).sum(axis=1)).ravel() > 0 if base.basis is not None else None
    if base_mask is not None:
        if not _is_selection(base.basis):
            raise ValueError("base restriction must be a string mask")
        support_ok = np.asarray((abs(full).T @ (~base_mask).astype(float))).ravel() == 0
        full = full[:, np.flatnonzero(support_ok)]
    full.eliminate_zeros()
    return Restriction(name, sps.csr_matrix(full))


def _is_selection(basis: sps.spmatrix) -> bool:
    b = sps.csc_matrix(basis)
    return bool(np.all(np.diff(b.indptr) == 1) and np.allclose(b.data, 1))


def charlie_x_restriction(scenario: Scenario) -> Restriction:
    """Unitary operations for Alice and Bob, Charlie measuring only in the X basis."""
    return charlie_basis_restriction(scenario, [np.eye(2), pauli.SINGLE["X"]], name="charlie-x")


def restriction_by_name(name: str | None, scenario: Scenario) -> Restriction:
    if name in (None, "none"):
        return Restriction("none")
    if name in ("unitary", "unitary_AB"):
        return unitary_restriction(scenario)
    if name in ("charlie-x", "charlie_x"):
        return charlie_x_restriction(scenario)
    raise ValueError(f"unknown restriction {name!r}")


def _perp_groups(sc: Scenario) -> list[tuple[CausalOrder | None, np.ndarray]]:
    n = _n_qubits(sc)
    if sc.kind is Kind.BIPARTITE:
        return [(None, _strings(n, ~kept_strings("valid", sc.kind)))]
    return [(o, _strings(n, ~kept_strings(o.value, sc.kind))) for o in sc.orders]


def _bipartite_blocks(b: _Builder, n: int, gS: int, S_basis: sps.csr_matrix, gP: int, perp_idx: np.ndarray,
                      const_coeffs: np.ndarray | None = None):
    """``_{B_O}(S - S_perp) >= 0`` and ``_{A_O}(S - S_perp) >= 0`` on the reduced 8x8 operators."""
    for drop in (3, 1):  # B_O, A_O
        digits = pauli.string_digits(n)
        keep_strings = np.flatnonzero(digits[:, drop] == 0)
        red, _ = _reduced_rows(n, keep_strings, drop)
        # map full strings -> reduced flattened rows (zero for strings not identity at `drop`)
        lift = sps.csr_matrix((np.ones(len(keep_strings)), (keep_strings, np.arange(len(keep_strings)))),
                              shape=(4**n, len(keep_strings))) @ red
        terms = []
        if S_basis is not None:
            terms.append((gS, sps.csr_matrix(S_basis.T @ lift)))
        terms.append((gP, -sps.csr_matrix(_selection(n, perp_idx).T @ lift)))
        const = np.zeros((2 ** (n - 1),) * 2, dtype=complex)
        if const_coeffs is not None:
            const = (sps.csr_matrix(const_coeffs.reshape(1, -1)) @ lift).toarray().reshape(const.shape)
        b.block(const, terms)


def _dual_program(W: Operator, N: Operator, sc: Scenario, restriction: Restriction):
    n = _n_qubits(sc)
    D = sc.layout.dim
    basis = _mask_basis(kept_strings("valid", sc.kind)) if restriction.is_none else restriction.basis
    w = pauli.pauli_coefficients(W)
    nv = pauli.pauli_coefficients(N)
    b = _Builder()
    gS = b.var("s", basis.shape[1])
    b.objective(gS, D * (basis.T @ w))
    b.equality([(gS, D * (basis.T @ nv))], 1.0)
    perps = []
    if sc.kind is Kind.BIPARTITE:
        order, idx = _perp_groups(sc)[0]
        gP = b.var("perp", len(idx))
        _bipartite_blocks(b, n, gS, basis, gP, idx)
        perps.append((order, gP, idx))
    else:
        Srows = _rows(n, basis)
        for order, idx in _perp_groups(sc):
            gP = b.var(f"perp[{order.value}]", len(idx))
            b.block(np.zeros((D, D)), [(gS, Srows), (gP, -pauli.sparse_strings(n, idx))])
            perps.append((order, gP, idx))
    return b, basis, perps


def _op_from(n: int, layout, basis, x) -> Operator:
    return Operator(layout, pauli.coefficients_to_matrix(n, np.asarray(basis @ x).ravel()))


def solve_dual(W, noise=None, restriction: Restriction | str | None = None, tol: float = DEFAULT_TOL,
               backend: str = "builtin") -> tuple[Witness, float, SolveResult]:
    W, N, sc = _scenario_pair(W, noise)
    if not isinstance(restriction, Restriction):
        restriction = restriction_by_name(restriction, sc)
    b, basis, perps = _dual_program(W, N, sc, restriction)
    res = solve(b.build(), tol=tol, backend=backend)
    if res.status.value == "infeasible":
        raise SolverError(f"restriction {restriction.name!r} admits no normalised witness", res)
    _check_solved(res, "witness problem")
    parts = b.split(res.x)
    n = _n_qubits(sc)
    S = _op_from(n, sc.layout, basis, parts[0])
    cert = []
    for order, gP, idx in perps:
        coeffs = np.zeros(4**n)
        coeffs[idx] = parts[gP]
        perp = Operator(sc.layout, pauli.coefficients_to_matrix(n, coeffs))
        cert.append(CertificatePart(order, S - perp, perp))
    name = "witness" if restriction.is_none else f"witness[{restriction.name}]"
    return Witness(S, tuple(cert), name=name), hs_inner(S, W), res


def construct_witness(W, noise=None, restriction: Restriction | str | None = None, tol: float = DEFAULT_TOL,
                      backend: str = "builtin") -> tuple[Witness, float]:
    """Optimal witness for ``W`` normalised by ``tr[S N] = 1``; returns ``(witness, tr[S W])``.

    A negative value certifies that ``W`` is causally nonseparable.
    """
    S, value, _ = solve_dual(W, noise, restriction, tol, backend)
    return S, value


def threshold_from_value(value: float) -> float:
    """Smallest visibility ``v`` at which ``v W + (1-v) N`` is still detected."""
    return 1.0 / (1.0 - value) if value < 0 else 1.0


# --- reports ---------------------------------------------------------------


@dataclasses.dataclass
class RobustnessReport:
    r_star: float
    witness: Witness
    witness_value: float
    decomposition: Decomposition
    diagnostics: dict

    @property
    def random_robustness(self) -> float:
        return max(self.r_star, 0.0)

    @property
    def visibility_threshold(self) -> float:
        return 1.0 / (1.0 + self.random_robustness)

    @property
    def duality_gap(self) -> float:
        return self.r_star + self.witness_value


def _boundary_check(N: Operator, tol: float) -> bool:
    if _is_white(N):
        return False
    r, _, _ = solve_primal(N, None, tol=tol)
    on_boundary = r > -1e-6
    if on_boundary:
        warnings.warn(
            "noise process lies on the boundary of the separable set (r* = %.2e against white noise); "
            "robustness against it may be infinite. Use robustness_at_visibility instead." % r,
            BoundaryNoiseWarning,
            stacklevel=3,
        )
    return on_boundary


def random_robustness(W, noise=None, tol: float = DEFAULT_TOL, backend: str = "builtin") -> RobustnessReport:
    """Solve the primal and dual problems for ``W`` against ``noise`` (white by default)."""
    W, N, sc = _scenario_pair(W, noise)
    boundary = _boundary_check(N, tol)
    try:
        r, dec, pres = solve_primal(W, N, tol, backend)
        S, value, dres = solve_dual(W, N, None, tol, backend)
    except SolverError as exc:
        if boundary:
            raise SolverError(f"{exc}; the noise is on the separable boundary, "
                              "use robustness_at_visibility") from exc
        raise
    gap = r + value
    if abs(gap) > 1e3 * tol * (1 + abs(r)):
        log.warning("primal and dual optima disagree by %.3e", gap)
    return RobustnessReport(r, S, value, dec, {"primal": pres.diagnostics(), "dual": dres.diagnostics()})


def robustness_at_visibility(W_target, W_noise, v: float, tol: float = DEFAULT_TOL,
                             backend: str = "builtin") -> RobustnessReport:
    """Random robustness, against white noise, of ``v W_target + (1 - v) W_noise``."""
    if not 0 <= v <= 1:
        raise ValueError("visibility must lie in [0, 1]")
    mix = as_operator(W_target) * v + as_operator(W_noise) * (1 - v)
    return random_robustness(mix, None, tol, backend)


# --- witness verification --------------------------------------------------


@dataclasses.dataclass
class VerificationReport:
    valid: bool
    worst_residual: float
    method: str
    details: dict

    def to_json(self) -> dict:
        return dataclasses.asdict(self)


def _reduced(op: Operator, label: str) -> np.ndarray:
    from .tensor import partial_trace

    return partial_trace(op, [label]).matrix


def verify_certificate(S: Witness, tol: float = 1e-9) -> VerificationReport:
    """Check the attached certificate: PSD parts, annihilated orthogonal parts, exact reassembly."""
    if S.certificate is None:
        raise ValueError("witness carries no certificate")
    sc = S.scenario
    details: dict = {}
    worst = 0.0
    if len(S.certificate) != S.expected_parts():
        raise ValueError("certificate has the wrong number of parts")
    for part in S.certificate:
        key = "bi" if part.order is None else part.order.value
        reassembly = (part.positive + part.orthogonal - S.op).norm()
        if sc.kind is Kind.BIPARTITE:
            eig = min(float(np.linalg.eigvalsh(_reduced(part.positive, lab))[0]) for lab in ("B_O", "A_O"))
            annihilated = project_valid(part.orthogonal).norm()
        else:
            eig = min_eigenvalue(part.positive)
            annihilated = project_order(part.orthogonal, part.order).norm()
        details[key] = {"min_eigenvalue": eig, "projector_residual": annihilated, "reassembly": reassembly}
        worst = max(worst, -eig, annihilated, reassembly)
    return VerificationReport(worst <= tol, worst, "certificate", details)


def search_certificate(S: Witness | Operator, tol: float = 1e-7, backend: str = "builtin") -> tuple[VerificationReport, Witness]:
    """Find the split maximising the smallest eigenvalue of the PSD parts."""
    S_op = as_operator(S)
    sc = Scenario.of(S_op.layout)
    n = _n_qubits(sc)
    D = sc.layout.dim
    s = pauli.pauli_coefficients(S_op)
    b = _Builder()
    gt = b.var("t", 1)
    b.objective(gt, [-1.0])
    perps = []
    if sc.kind is Kind.BIPARTITE:
        order, idx = _perp_groups(sc)[0]
        gP = b.var("perp", len(idx))
        start = len(b.blocks)
        _bipartite_blocks(b, n, None, None, gP, idx, const_coeffs=s)
        for k in range(start, len(b.blocks)):
            const, terms = b.blocks[k]
            d = const.shape[0]
            terms.append((gt, -sps.csr_matrix(np.eye(d).reshape(1, -1))))
        perps.append((order, gP, idx))
    else:
        for order, idx in _perp_groups(sc):
            gP = b.var(f"perp[{order.value}]", len(idx))
            b.block(S_op.matrix, [(gt, -sps.csr_matrix(np.eye(D).reshape(1, -1))), (gP, -pauli.sparse_strings(n, idx))])
            perps.append((order, gP, idx))
    res = solve(b.build(), tol=1e-9, backend=backend)
    _check_solved(res, "certificate search")
    x = b.split(res.x)
    t = float(x[0][0])
    cert = []
    for order, gP, idx in perps:
        coeffs = np.zeros(4**n)
        coeffs[idx] = x[gP]
        perp = Operator(sc.layout, pauli.coefficients_to_matrix(n, coeffs))
        cert.append(CertificatePart(order, S_op - perp, perp))
    witness = Witness(S_op, tuple(cert), name=getattr(S, "name", ""))
    report = VerificationReport(t >= -tol, max(-t, 0.0), "search", {"max_min_eigenvalue": t})
    return report, witness


def verify_witness(S, tol: float = 1e-7, search: bool | None = None, backend: str = "builtin") -> VerificationReport:
    """Decide whether ``S`` is a witness of causal nonseparability.

    Uses the attached certificate when present (and ``search`` is not
    ``True``); otherwise searches for one with an SDP.
    """
    has_cert = isinstance(S, Witness) and S.certificate is not None
    if search is None:
        search = not has_cert
    if not search:
        return verify_certificate(S, tol)
    report, _ = search_certificate(S, tol, backend)
    return report


# --- generalized robustness ------------------------------------------------


@dataclasses.dataclass
class GeneralizedRobustness:
    value: float
    omega: Operator
    decomposition: Decomposition
    diagnostics: dict


def generalized_robustness(W, tol: float = DEFAULT_TOL, backend: str = "builtin") -> GeneralizedRobustness:
    """``min tr(Omega) / d_O`` over valid (unnormalised) ``Omega >= 0`` with ``W + Omega`` separable."""
    W = as_operator(W)
    sc = Scenario.of(W.layout)
    n = _n_qubits(sc)
    D = sc.layout.dim
    o1, o2 = sc.orders
    valid_idx = _strings(n, kept_strings("valid", sc.kind))
    split1 = kept_strings("split:" + o1.value, sc.kind)
    split2 = kept_strings("split:" + o2.value, sc.kind)
    idx1 = _strings(n, split1)
    w = pauli.pauli_coefficients(W)
    b = _Builder()
    gO = b.var("omega", len(valid_idx))
    g1 = b.var("w1", len(idx1))
    cost = np.zeros(len(valid_idx))
    cost[valid_idx == 0] = D / sc.d_out
    b.objective(gO, cost)
    rowsO = pauli.sparse_strings(n, valid_idx)
    rows1 = pauli.sparse_strings(n, idx1)
    b.block(np.zeros((D, D)), [(gO, rowsO)])
    b.block(np.zeros((D, D)), [(g1, rows1)])
    b.block(W.matrix, [(gO, rowsO), (g1, -rows1)])
    posO = -np.ones(4**n, dtype=int)
    posO[valid_idx] = np.arange(len(valid_idx))
    pos1 = -np.ones(4**n, dtype=int)
    pos1[idx1] = np.arange(len(idx1))
    for s in np.flatnonzero(~split2):
        if posO[s] < 0 and pos1[s] < 0:
            continue
        eO = np.zeros(len(valid_idx))
        e1 = np.zeros(len(idx1))
        if posO[s] >= 0:
            eO[posO[s]] = 1.0
        if pos1[s] >= 0:
            e1[pos1[s]] = -1.0
        b.equality([(gO, eO), (g1, e1)], -w[s])
    res = solve(b.build(), tol=tol, backend=backend)
    _check_solved(res, "generalized robustness problem")
    xo, x1 = b.split(res.x)
    cO = np.zeros(4**n)
    cO[valid_idx] = xo
    c1 = np.zeros(4**n)
    c1[idx1] = x1
    omega = Operator(sc.layout, pauli.coefficients_to_matrix(n, cO))
    W1 = Operator(sc.layout, pauli.coefficients_to_matrix(n, c1))
    W2 = W + omega - W1
    return GeneralizedRobustness(max(res.objective_value, 0.0), omega, Decomposition(sc.orders, (W1, W2)),
                                 res.diagnostics())
