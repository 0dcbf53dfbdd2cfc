"""JSON formats for operators, witnesses, instruments and reports.

Operators are written as ``{"layout": [...], "pauli": {"1ZZ1": 0.25, ...}}``
with an optional ``"dense"`` field of ``[re, im]`` pairs in row-major order.
When both are present the Pauli terms win.  Reading an operator keeps its
Pauli expansion, so writing it back reproduces the input exactly.
"""

from __future__ import annotations

import json
import math
from typing import Any

import numpy as np

from . import pauli
from .born import Instrument, SampleResult
from .robustness import Decomposition, GeneralizedRobustness, RobustnessReport, VerificationReport
from .spaces import CausalOrder, ValidityReport
from .tensor import Operator, SystemLayout, as_operator
from .witness import CertificatePart, Witness

#: Pauli coefficients with smaller magnitude are not written
PAULI_CUTOFF = 1e-15


def _float(x: float) -> float | str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def operator_to_json(op, dense: bool = False) -> dict:
    op = as_operator(op)
    out: dict[str, Any] = {"layout": op.layout.to_json()}
    if op.layout.is_qubit:
        exp = pauli.to_pauli(op, cutoff=PAULI_CUTOFF)
        out["pauli"] = {s: float(c) for s, c in sorted(exp.terms.items(), key=lambda t: pauli.string_index(t[0]))}
    if dense or not op.layout.is_qubit:
        out["dense"] = [[[float(z.real), float(z.imag)] for z in row] for row in op.matrix]
    return out


def operator_from_json(obj: dict) -> Operator:
    layout = SystemLayout.from_json(obj["layout"])
    if "pauli" in obj:
        return pauli.from_pauli(pauli.PauliExpansion(layout, {k: float(v) for k, v in obj["pauli"].items()}))
    if "dense" in obj:
        arr = np.asarray(obj["dense"], dtype=float)
        return Operator(layout, arr[..., 0] + 1j * arr[..., 1])
    raise ValueError("operator JSON needs a 'pauli' or 'dense' field")


def witness_to_json(w: Witness, dense: bool = False) -> dict:
    """Operator JSON plus ``kind``, ``name`` and the certificate, so it also reads as a bare operator."""
    out: dict[str, Any] = {"kind": "witness", "name": w.name, **operator_to_json(w.op, dense)}
    if w.certificate is not None:
        out["certificate"] = [
            {
                "order": None if p.order is None else p.order.value,
                "positive": operator_to_json(p.positive, dense),
                "orthogonal": operator_to_json(p.orthogonal, dense),
            }
            for p in w.certificate
        ]
    return out


def witness_from_json(obj: dict) -> Witness:
    if obj.get("kind") != "witness":
        return Witness(operator_from_json(obj))
    cert = None
    if obj.get("certificate") is not None:
        cert = tuple(
            CertificatePart(
                None if p["order"] is None else CausalOrder(p["order"]),
                operator_from_json(p["positive"]),
                operator_from_json(p["orthogonal"]),
            )
            for p in obj["certificate"]
        )
    return Witness(operator_from_json(obj), cert, obj.get("name", ""))


def load_operator(obj: dict) -> Operator:
    """Operator from a bare operator or witness document, or from a report that embeds one."""
    if "layout" in obj:
        return operator_from_json(obj)
    for key in ("operator", "witness"):
        if key in obj:
            return load_operator(obj[key])
    raise ValueError("no operator found in JSON document")


def instrument_to_json(inst: Instrument) -> dict:
    return {
        "kind": "instrument",
        "party": inst.party,
        "setting": inst.setting,
        "outcomes": list(inst.outcomes),
        "elements": [operator_to_json(e) for e in inst.elements],
    }


def instrument_from_json(obj: dict) -> Instrument:
    return Instrument(obj["party"], obj["setting"], tuple(operator_from_json(e) for e in obj["elements"]),
                      tuple(obj["outcomes"]))


def decomposition_to_json(d: Decomposition) -> dict:
    return {
        "orders": [o.value for o in d.orders],
        "weights": list(d.weights()),
        "components": [operator_to_json(c) for c in d.components],
    }


def _diag(diagnostics: dict) -> dict:
    return {k: ({kk: _float(vv) if isinstance(vv, (float, np.floating)) else vv for kk, vv in v.items()}
                if isinstance(v, dict) else v) for k, v in diagnostics.items()}


def robustness_to_json(rep: RobustnessReport) -> dict:
    return {
        "kind": "robustness",
        "r_star": rep.r_star,
        "random_robustness": rep.random_robustness,
        "visibility_threshold": rep.visibility_threshold,
        "witness_value": rep.witness_value,
        "duality_gap": rep.duality_gap,
        "witness": witness_to_json(rep.witness),
        "decomposition": decomposition_to_json(rep.decomposition),
        "diagnostics": _diag(rep.diagnostics),
    }


def generalized_to_json(g: GeneralizedRobustness) -> dict:
    return {
        "kind": "generalized_robustness",
        "value": g.value,
        "omega": operator_to_json(g.omega),
        "decomposition": decomposition_to_json(g.decomposition),
        "diagnostics": _diag(g.diagnostics),
    }


def verification_to_json(rep: VerificationReport) -> dict:
    return {"kind": "verification", **rep.to_json()}


def validity_to_json(rep: ValidityReport) -> dict:
    return {"kind": "validity", **rep.to_json()}


def sample_to_json(res: SampleResult) -> dict:
    return {"kind": "sample", **res.to_json()}


def dumps(obj: dict) -> str:
    return json.dumps(obj, indent=2, default=_default)


def _default(x):
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"cannot serialise {type(x).__name__}")
