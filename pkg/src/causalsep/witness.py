"""Witness objects and their dual-cone certificates."""

from __future__ import annotations

import dataclasses

import numpy as np

from .spaces import CausalOrder, Kind, Scenario
from .tensor import Operator, as_operator


@dataclasses.dataclass(frozen=True)
class CertificatePart:
    """One split ``S = positive + orthogonal`` of a witness.

    Bipartite witnesses carry a single part with ``order=None``: the reduced
    operators ``_{B_O} positive`` and ``_{A_O} positive`` must be PSD and the
    validity projector must annihilate ``orthogonal``. Tripartite witnesses
    carry one part per causal order: ``positive`` must be PSD and the order
    projector must annihilate ``orthogonal``.
    """

    order: CausalOrder | None
    positive: Operator
    orthogonal: Operator


@dataclasses.dataclass(frozen=True)
class Witness:
    op: Operator
    certificate: tuple[CertificatePart, ...] | None = None
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "op", as_operator(self.op))
        if self.certificate is not None:
            object.__setattr__(self, "certificate", tuple(self.certificate))

    @property
    def scenario(self) -> Scenario:
        return Scenario.of(self.op.layout)

    @property
    def layout(self):
        return self.op.layout

    @property
    def matrix(self) -> np.ndarray:
        return self.op.matrix

    def expected_parts(self) -> int:
        return 1 if self.scenario.kind is Kind.BIPARTITE else 2

    def with_certificate(self, parts) -> "Witness":
        return dataclasses.replace(self, certificate=tuple(parts))
