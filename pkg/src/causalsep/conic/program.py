"""Problem and result containers for small semidefinite programs.

A :class:`ConicProgram` is

    minimize    c . x
    subject to  A x = b
                F0_j + sum_i x_i F_ij  >= 0   for every PSD block j

with real ``x`` and Hermitian (possibly complex) ``F``.
"""

from __future__ import annotations

import dataclasses
import enum
from typing import Sequence

import numpy as np
import scipy.sparse as sps


class Status(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    MAX_ITER = "max_iter"
    # stalled short of the requested tolerance but within a few orders of it
    INACCURATE = "optimal_inaccurate"


@dataclasses.dataclass
class PSDBlock:
    """Affine Hermitian matrix ``constant + sum_i x_i F_i``.

    ``coeffs`` holds the row-major flattened ``F_i`` as rows of a sparse
    ``(n_vars, d*d)`` matrix.
    """

    constant: np.ndarray
    coeffs: sps.csr_matrix

    def __post_init__(self):
        self.constant = np.asarray(self.constant)
        d = self.constant.shape[0]
        if self.constant.shape != (d, d):
            raise ValueError("block constant must be square")
        if not np.allclose(self.constant, self.constant.conj().T, atol=1e-12):
            raise ValueError("block constant must be Hermitian")
        self.coeffs = sps.csr_matrix(self.coeffs)
        if self.coeffs.shape[1] != d * d:
            raise ValueError(f"coefficient rows must have length {d * d}")

    @classmethod
    def from_dense(cls, constant, matrices: Sequence[np.ndarray]) -> "PSDBlock":
        constant = np.asarray(constant)
        d = constant.shape[0]
        rows = np.array([np.asarray(m).reshape(d * d) for m in matrices])
        if rows.size == 0:
            rows = np.zeros((0, d * d))
        block = cls(constant, sps.csr_matrix(rows))
        for m in matrices:
            m = np.asarray(m)
            if not np.allclose(m, m.conj().T, atol=1e-12):
                raise ValueError("coefficient matrices must be Hermitian")
        return block

    @property
    def dim(self) -> int:
        return self.constant.shape[0]

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.constant) and bool(np.any(self.constant.imag)) or (
            np.iscomplexobj(self.coeffs.data) and bool(np.any(self.coeffs.data.imag))
        )

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        d = self.dim
        return self.constant + (self.coeffs.T @ x).reshape(d, d)

    def adjoint(self, Z: np.ndarray) -> np.ndarray:
        """``[Re tr(F_i Z)]_i``."""
        return np.real(self.coeffs @ np.asarray(Z).T.reshape(-1))


@dataclasses.dataclass
class ConicProgram:
    n_vars: int
    objective: np.ndarray
    blocks: list[PSDBlock]
    eq_matrix: np.ndarray | None = None
    eq_rhs: np.ndarray | None = None
    names: list[str] | None = None

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float).reshape(-1)
        if self.objective.shape != (self.n_vars,):
            raise ValueError("objective length must equal n_vars")
        if self.eq_matrix is None:
            self.eq_matrix = np.zeros((0, self.n_vars))
            self.eq_rhs = np.zeros(0)
        self.eq_matrix = np.atleast_2d(np.asarray(self.eq_matrix, dtype=float))
        self.eq_rhs = np.asarray(self.eq_rhs, dtype=float).reshape(-1)
        if self.eq_matrix.shape != (len(self.eq_rhs), self.n_vars):
            raise ValueError("equality matrix shape does not match rhs/n_vars")
        for blk in self.blocks:
            if blk.coeffs.shape[0] != self.n_vars:
                raise ValueError("every block needs one coefficient row per variable")

    @property
    def n_eq(self) -> int:
        return len(self.eq_rhs)

    def primal_residual(self, x: np.ndarray) -> float:
        """Largest violation among equalities and negative block eigenvalues."""
        res = float(np.max(np.abs(self.eq_matrix @ x - self.eq_rhs), initial=0.0))
        for blk in self.blocks:
            res = max(res, -float(np.linalg.eigvalsh(blk.evaluate(x))[0]))
        return res


@dataclasses.dataclass
class SolveResult:
    status: Status
    x: np.ndarray
    objective_value: float
    dual_objective: float
    block_duals: list[np.ndarray]
    eq_duals: np.ndarray
    gap: float
    primal_infeasibility: float
    dual_infeasibility: float
    iterations: int
    backend: str = "builtin"
    history: list[dict] = dataclasses.field(default_factory=list)
    message: str = ""

    @property
    def ok(self) -> bool:
        return self.status in (Status.OPTIMAL, Status.INACCURATE)

    def diagnostics(self) -> dict:
        return {
            "status": self.status.value,
            "backend": self.backend,
            "objective": self.objective_value,
            "dual_objective": self.dual_objective,
            "gap": self.gap,
            "primal_infeasibility": self.primal_infeasibility,
            "dual_infeasibility": self.dual_infeasibility,
            "iterations": self.iterations,
            "message": self.message,
        }
