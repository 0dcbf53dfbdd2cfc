"""Instruments, the generalised Born rule and simulated witness measurements.

A witness ``S`` is measured by writing it as a real combination of products
of instrument elements, ``S = sum_s sum_o g_s[o] M_{o_A|s_A} (x) M_{o_B|s_B} (x) ...``,
one coefficient table ``g_s`` per joint setting ``s``.  Then
``tr[S W] = sum_s sum_o g_s[o] P(o | s)`` and each term is estimated from
outcome frequencies.
"""

from __future__ import annotations

import dataclasses
import itertools
import logging
from typing import Sequence

import numpy as np
from scipy.stats import unitary_group

from . import pauli
from .catalog.unitaries import PAIR_TABLE, cj_of_unitary, gate
from .spaces import Scenario, project_valid
from .tensor import Operator, SystemLayout, as_operator, min_eigenvalue, partial_trace
from .witness import Witness

log = logging.getLogger(__name__)

_ONE = np.eye(2, dtype=complex)


def party_layout(layout: SystemLayout, party: str) -> SystemLayout:
    """The subsystems of ``party``, in layout order."""
    entries = [(lab, d, party) for lab, d in zip(layout.labels, layout.dims) if layout.party_of[lab] == party]
    if not entries:
        raise ValueError(f"no subsystems belong to party {party!r}")
    return SystemLayout.of(*entries)


def parties(layout: SystemLayout) -> tuple[str, ...]:
    seen: list[str] = []
    for lab in layout.labels:
        p = layout.party_of[lab]
        if p not in seen:
            seen.append(p)
    return tuple(seen)


@dataclasses.dataclass(frozen=True)
class Instrument:
    """Outcome-indexed CJ matrices for one party and one setting.

    For a party with only an input system the elements are POVM elements.
    """

    party: str
    setting: str
    elements: tuple[Operator, ...]
    outcomes: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.elements:
            raise ValueError("an instrument needs at least one element")
        layout = self.elements[0].layout
        if any(e.layout != layout for e in self.elements):
            raise ValueError("instrument elements must share a layout")
        if not self.outcomes:
            object.__setattr__(self, "outcomes", tuple(str(k) for k in range(len(self.elements))))
        if len(self.outcomes) != len(self.elements):
            raise ValueError("one outcome label per element")

    @property
    def layout(self) -> SystemLayout:
        return self.elements[0].layout

    def __len__(self):
        return len(self.elements)

    def total(self) -> Operator:
        acc = self.elements[0]
        for e in self.elements[1:]:
            acc = acc + e
        return acc


@dataclasses.dataclass
class InstrumentReport:
    valid: bool
    min_eigenvalue: float
    normalization_residual: float

    def to_json(self) -> dict:
        return dataclasses.asdict(self)


def _io_labels(layout: SystemLayout) -> tuple[list[str], list[str]]:
    outs = [lab for lab in layout.labels if lab.endswith("_O")]
    ins = [lab for lab in layout.labels if lab not in outs]
    return ins, outs


def validate_instrument(inst: Instrument, tol: float = 1e-10) -> InstrumentReport:
    """Elements PSD and ``tr_out sum_o M_o`` equal to the identity on the input."""
    lam = min(min_eigenvalue(e) for e in inst.elements)
    ins, outs = _io_labels(inst.layout)
    total = inst.total()
    reduced = partial_trace(total, outs) if outs else total
    residual = float(np.max(np.abs(reduced.matrix - np.eye(reduced.dim))))
    scale = max(1.0, max(np.linalg.norm(e.matrix, 2) for e in inst.elements))
    return InstrumentReport(lam >= -tol * scale and residual <= tol, lam, residual)


# --- stock instruments -----------------------------------------------------


def _proj(symbol: str, sign: int) -> np.ndarray:
    return 0.5 * (_ONE + sign * pauli.SINGLE[symbol])


def _local(party: str, labels: Sequence[str]) -> SystemLayout:
    return SystemLayout.of(*[(lab, 2, party) for lab in labels])


def stock_instrument(party: str, setting: str) -> Instrument:
    """Instruments named by their setting label.

    ``"P1"``: measure ``P`` on the input, send out the maximally mixed state.
    ``"1Q"``: ignore the input, send out the ``Q`` eigenstate given by the
    outcome (a fair coin).  ``"P,+Q"`` / ``"P,-Q"``: measure ``P``, send out
    the ``+1`` / ``-1`` eigenstate of ``Q``.  ``"U:<gates>"``: apply a fixed
    unitary (one outcome).  Parties with no output (Charlie) take ``"P"``,
    a projective measurement of ``P``.
    """
    signs = (1, -1)
    labels = ("+", "-")
    if party == "C":
        if setting not in ("X", "Y", "Z"):
            raise ValueError(f"Charlie measures X, Y or Z, not {setting!r}")
        layout = _local(party, ["C_I"])
        return Instrument(party, setting, tuple(Operator(layout, _proj(setting, s)) for s in signs), labels)
    layout = _local(party, [f"{party}_I", f"{party}_O"])
    if setting.startswith("U:"):
        u = cj_of_unitary(gate(setting[2:]), party, setting[2:])
        return Instrument(party, setting, (u.cj,), ("1",))
    if len(setting) == 2 and setting[1] == "1" and setting[0] in "XYZ":
        mats = [np.kron(_proj(setting[0], s), _ONE / 2) for s in signs]
    elif len(setting) == 2 and setting[0] == "1" and setting[1] in "XYZ":
        mats = [np.kron(_ONE / 2, _proj(setting[1], s)) for s in signs]
    elif len(setting) == 4 and setting[1] == "," and setting[0] in "XYZ" and setting[2] in "+-" and setting[3] in "XYZ":
        tau = 1 if setting[2] == "+" else -1
        mats = [np.kron(_proj(setting[0], s), _proj(setting[3], tau)) for s in signs]
    else:
        raise ValueError(f"unknown instrument setting {setting!r}")
    return Instrument(party, setting, tuple(Operator(layout, m) for m in mats), labels)


# --- Born rule ---------------------------------------------------------------


def born_probability(maps: Sequence, W) -> float:
    """``tr[(M_A (x) M_B (x) ...) W]`` with one CJ matrix per party, in layout order."""
    W = as_operator(W)
    mats = [as_operator(m).matrix if not isinstance(m, np.ndarray) else m for m in maps]
    full = mats[0]
    for m in mats[1:]:
        full = np.kron(full, m)
    if full.shape != W.matrix.shape:
        raise ValueError("instrument elements do not cover the process layout")
    return float(np.real(np.sum(full.T * W.matrix)))


def joint_probabilities(W, instruments: Sequence[Instrument]) -> np.ndarray:
    """Array ``P[o_1, o_2, ...]`` of outcome probabilities for one joint setting."""
    W = as_operator(W)
    dims = [inst.layout.dim for inst in instruments]
    if int(np.prod(dims)) != W.dim:
        raise ValueError("instruments do not cover the process layout")
    n = len(dims)
    letters = "abcdefghijklmnopqrstuvwxyz"
    rows, cols, outs = letters[:n], letters[n:2 * n], letters[2 * n:3 * n]
    # tr[(M_1 (x) ... ) W] = sum M_1[i1, j1] ... W[j1 j2 .., i1 i2 ..]
    spec = ",".join(f"{outs[k]}{rows[k]}{cols[k]}" for k in range(n)) + f",{cols}{rows}->{outs}"
    stacks = [np.stack([e.matrix for e in inst.elements]) for inst in instruments]
    return np.real(np.einsum(spec, *stacks, W.matrix.reshape(dims + dims), optimize=True))


# --- witness compilation -----------------------------------------------------

# a party factor expands into (weight, setting, outcome index) triples
_Factor = list[tuple[float, str, int]]
_IDENTITY_SETTING = {"C": "Z"}


def _factor_measure_prepare(party: str, symbols: str, identity_setting: str) -> _Factor:
    if party == "C":
        (p,) = symbols
        if p == "1":
            return [(1.0, identity_setting, 0), (1.0, identity_setting, 1)]
        return [(1.0, p, 0), (-1.0, p, 1)]
    p, q = symbols
    if p == "1" and q == "1":
        # sum of the outcomes of a "P1" or "1Q" instrument is half the identity
        return [(2.0, identity_setting, 0), (2.0, identity_setting, 1)]
    if q == "1":
        return [(2.0, p + "1", 0), (-2.0, p + "1", 1)]
    if p == "1":
        return [(2.0, "1" + q, 0), (-2.0, "1" + q, 1)]
    return [(tau * a, f"{p},{'+' if tau > 0 else '-'}{q}", k) for tau in (1, -1) for k, a in enumerate((1, -1))]


def _factor_unitary(party: str, symbols: str, identity_setting: str) -> _Factor:
    if party == "C":
        return _factor_measure_prepare(party, symbols, identity_setting)
    if symbols not in PAIR_TABLE:
        raise ValueError(f"{party} factor {symbols!r} mixes identity and non-identity; no unitary expansion")
    return [(0.5 * c, "U:" + name, 0) for c, name in PAIR_TABLE[symbols]]


@dataclasses.dataclass
class WitnessDecomposition:
    """``target = sum_s sum_o groups[s][o] (x)_k M_{o_k | s_k}``."""

    target: Witness
    parties: tuple[str, ...]
    groups: dict[tuple[str, ...], np.ndarray]
    mode: str = "measure-prepare"

    def instruments(self, settings: tuple[str, ...]) -> list[Instrument]:
        return [_cached_instrument(p, s) for p, s in zip(self.parties, settings)]

    @property
    def terms(self) -> list[tuple[float, tuple[str, ...], tuple[int, ...]]]:
        """Flat list of ``(coefficient, settings, outcomes)``."""
        out = []
        for settings, g in self.groups.items():
            for idx in zip(*np.nonzero(g)):
                out.append((float(g[idx]), settings, tuple(int(i) for i in idx)))
        return out

    @property
    def n_settings(self) -> int:
        return len(self.groups)

    def reassemble(self) -> Operator:
        layout = self.target.layout
        acc = np.zeros((layout.dim, layout.dim), dtype=complex)
        for settings, g in self.groups.items():
            insts = self.instruments(settings)
            for idx in zip(*np.nonzero(g)):
                prod = np.ones((1, 1))
                for inst, o in zip(insts, idx):
                    prod = np.kron(prod, inst.elements[o].matrix)
                acc += g[idx] * prod
        return Operator(layout, acc)

    def residual(self) -> float:
        return float(np.max(np.abs(self.reassemble().matrix - self.target.matrix)))


_INSTRUMENTS: dict[tuple[str, str], Instrument] = {}


def _cached_instrument(party: str, setting: str) -> Instrument:
    key = (party, setting)
    if key not in _INSTRUMENTS:
        _INSTRUMENTS[key] = stock_instrument(party, setting)
    return _INSTRUMENTS[key]


def _party_slices(layout: SystemLayout) -> list[tuple[str, slice]]:
    out, start = [], 0
    for p in parties(layout):
        n = len(party_layout(layout, p))
        out.append((p, slice(start, start + n)))
        start += n
    return out


def compile_witness(S, mode: str = "measure-prepare", cutoff: float = 1e-12) -> WitnessDecomposition:
    """Express ``S`` through stock instruments.

    ``"measure-prepare"`` uses Pauli measurements followed by Pauli
    eigenstate preparations; ``"unitary"`` uses single-outcome unitary
    instruments for Alice and Bob (this needs every Alice/Bob factor to be
    either ``1 (x) 1`` or a product of two non-identity Paulis).  Charlie
    always measures in a Pauli basis.  Identity factors reuse a setting that
    is already needed, so that few distinct settings appear.
    """
    W = S if isinstance(S, Witness) else Witness(as_operator(S))
    layout = W.layout
    if not layout.is_qubit:
        raise ValueError("compilation needs an all-qubit layout")
    if mode not in ("measure-prepare", "unitary"):
        raise ValueError("mode must be 'measure-prepare' or 'unitary'")
    slices = _party_slices(layout)
    names = tuple(p for p, _ in slices)
    expansion = pauli.to_pauli(W.op, cutoff=cutoff)
    strings = {s: c for s, c in expansion.terms.items() if abs(c) > cutoff}

    # settings needed for non-identity factors; identity factors pick one of these
    identity_setting = {}
    for p, sl in slices:
        used = sorted({s[sl] for s in strings})
        if p == "C":
            options = [u for u in used if u != "1"]
            identity_setting[p] = options[0] if options else _IDENTITY_SETTING["C"]
        elif mode == "unitary":
            identity_setting[p] = ""
        else:
            options = [u for u in used if (u[0] == "1") != (u[1] == "1")]
            identity_setting[p] = options[0] if options else "Z1"
    factor = _factor_unitary if mode == "unitary" else _factor_measure_prepare

    groups: dict[tuple[str, ...], np.ndarray] = {}
    for string, coeff in sorted(strings.items()):
        per_party = [factor(p, string[sl], identity_setting[p]) for p, sl in slices]
        for combo in itertools.product(*per_party):
            settings = tuple(c[1] for c in combo)
            if settings not in groups:
                shape = tuple(len(_cached_instrument(p, s)) for p, s in zip(names, settings))
                groups[settings] = np.zeros(shape)
            weight = coeff * float(np.prod([c[0] for c in combo]))
            groups[settings][tuple(c[2] for c in combo)] += weight
    return WitnessDecomposition(W, names, groups, mode)


def measure_witness(d: WitnessDecomposition, W) -> float:
    """``sum_s sum_o g_s[o] P(o | s)`` from exact Born-rule probabilities."""
    W = as_operator(W)
    return float(sum(np.sum(g * joint_probabilities(W, d.instruments(s))) for s, g in d.groups.items()))


# --- Monte-Carlo sampling ----------------------------------------------------


@dataclasses.dataclass
class SampleResult:
    counts: dict[tuple[str, ...], np.ndarray]
    shots: dict[tuple[str, ...], int]
    estimate: float
    stderr: float
    seed: int

    def to_json(self) -> dict:
        return {
            "estimate": self.estimate,
            "stderr": self.stderr,
            "seed": self.seed,
            "total_shots": int(sum(self.shots.values())),
            "settings": [
                {"settings": list(k), "shots": int(self.shots[k]), "counts": self.counts[k].tolist()}
                for k in self.counts
            ],
        }


def _allocate(total: int, weights: np.ndarray) -> np.ndarray:
    """Largest-remainder split of ``total`` shots proportional to ``weights``, at least one each."""
    k = len(weights)
    if total < k:
        raise ValueError(f"need at least {k} shots, one per joint setting")
    base = np.ones(k, dtype=np.int64)
    share = weights / weights.sum() * (total - k)
    extra = np.floor(share).astype(np.int64)
    rest = total - k - extra.sum()
    order = np.argsort(-(share - extra), kind="stable")
    extra[order[:rest]] += 1
    return base + extra


def new_seed() -> int:
    """Fresh 64-bit seed from OS entropy."""
    return int(np.random.SeedSequence().generate_state(1, dtype=np.uint64)[0])


def sample_outcomes(W, decomposition: WitnessDecomposition, shots: int, seed: int | None = None) -> SampleResult:
    """Simulate ``shots`` runs split across the joint settings.

    Shots are allotted in proportion to the largest coefficient of each
    setting.  Each setting draws from its own Philox stream spawned from
    ``seed``, so results are reproducible and independent of evaluation order.
    """
    W = as_operator(W)
    seed = new_seed() if seed is None else int(seed)
    if not 0 <= seed < 2**64:
        raise ValueError("seed must be a 64-bit unsigned integer")
    keys = list(decomposition.groups)
    weights = np.array([np.max(np.abs(decomposition.groups[k])) for k in keys])
    weights = np.where(weights > 0, weights, 1e-300)
    n_shots = _allocate(int(shots), weights)
    children = np.random.SeedSequence(seed).spawn(len(keys))
    counts, alloc = {}, {}
    estimate = 0.0
    variance = 0.0
    for key, n, child in zip(keys, n_shots, children):
        g = decomposition.groups[key]
        p = joint_probabilities(W, decomposition.instruments(key)).ravel()
        if np.min(p) < -1e-9 or abs(p.sum() - 1) > 1e-9:
            raise ValueError("outcome probabilities are not a distribution; is the process valid?")
        p = np.clip(p, 0, None)
        rng = np.random.Generator(np.random.Philox(child))
        c = rng.multinomial(int(n), p / p.sum())
        freq = c / n
        gv = g.ravel()
        mean = float(gv @ freq)
        var = float((gv**2) @ freq - mean**2)
        estimate += mean
        variance += max(var, 0.0) / max(int(n) - 1, 1)
        counts[key] = c.reshape(g.shape)
        alloc[key] = int(n)
    return SampleResult(counts, alloc, estimate, float(np.sqrt(variance)), seed)


# --- random objects for property checks -------------------------------------


def random_instrument(party: str, n_outcomes: int = 2, rng=None, env: int = 2) -> Instrument:
    """Random instrument from a Haar-random Stinespring isometry.

    ``V: X_I -> X_O (x) K_outcome (x) K_env``; element ``a`` is the CJ matrix of
    ``rho -> tr_env <a| V rho V^dag |a>``.
    """
    rng = np.random.default_rng(rng)
    d_in = 2
    d_out = 1 if party == "C" else 2
    big = d_out * n_outcomes * env
    if big < d_in:
        raise ValueError("isometry dimension too small")
    V = unitary_group.rvs(big, random_state=rng)[:, :d_in].reshape(d_out, n_outcomes, env, d_in)
    phi = np.eye(d_in).reshape(-1)
    elements = []
    labels = [f"{party}_I"] + ([] if party == "C" else [f"{party}_O"])
    layout = _local(party, labels)
    for a in range(n_outcomes):
        M = np.zeros((d_in * d_out, d_in * d_out), dtype=complex)
        for e in range(env):
            K = V[:, a, e, :]
            v = np.kron(np.eye(d_in), K) @ phi
            M += np.outer(v, v.conj())
        elements.append(Operator(layout, M.T))
    return Instrument(party, "random", tuple(elements))


def random_process(scenario: Scenario, rng=None, scale: float | None = None) -> Operator:
    """Valid process ``1/d_I + eps L_V(H)`` with a random Hermitian ``H``.

    ``eps`` is drawn uniformly up to the largest value keeping the matrix PSD,
    so both separable and nonseparable processes appear.
    """
    rng = np.random.default_rng(rng)
    D = scenario.layout.dim
    G = rng.normal(size=(D, D)) + 1j * rng.normal(size=(D, D))
    H = Operator(scenario.layout, G + G.conj().T)
    P = project_valid(H, scenario)
    # drop the identity component so the trace stays d_O
    P = P - Operator.identity(scenario.layout) * (P.trace() / D)
    lam = np.linalg.eigvalsh(P.matrix)[0]
    base = 1.0 / scenario.d_in
    eps_max = base / -lam if lam < 0 else 1.0
    eps = eps_max * (rng.uniform() if scale is None else scale)
    return scenario.white_noise() + P * eps
