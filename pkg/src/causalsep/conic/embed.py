"""Real symmetric embedding of Hermitian blocks.

``H = R + iJ`` maps to ``[[R, -J], [J, R]]``; the embedding is PSD exactly
when ``H`` is, with every eigenvalue doubled in multiplicity.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sps

from .program import ConicProgram, PSDBlock


def embed(H: np.ndarray) -> np.ndarray:
    H = np.asarray(H)
    R, J = H.real, H.imag
    return np.block([[R, -J], [J, R]])


def unembed(E: np.ndarray) -> np.ndarray:
    """Inverse of :func:`embed` on its range; averages the redundant copies."""
    d = E.shape[0] // 2
    A, B, C, D = E[:d, :d], E[:d, d:], E[d:, :d], E[d:, d:]
    return 0.5 * (A + D) + 0.5j * (C - B)


def dual_unembed(E: np.ndarray) -> np.ndarray:
    """Map a real dual block back so that ``Re tr(F Z) = tr(embed(F) E)``."""
    d = E.shape[0] // 2
    A, B, C, D = E[:d, :d], E[:d, d:], E[d:, :d], E[d:, d:]
    return (A + D) + 1j * (C - B)


def embed_block(block: PSDBlock) -> PSDBlock:
    d = block.dim
    rows = []
    for i in range(block.coeffs.shape[0]):
        F = block.coeffs.getrow(i).toarray().reshape(d, d)
        rows.append(embed(F).reshape(-1))
    coeffs = sps.csr_matrix(np.array(rows)) if rows else sps.csr_matrix((0, 4 * d * d))
    return PSDBlock(embed(block.constant), coeffs)


def embed_program(prog: ConicProgram) -> ConicProgram:
    """Same program with every complex block replaced by its real embedding."""
    blocks = [embed_block(b) if b.is_complex else PSDBlock(np.real(b.constant), b.coeffs.real)
              for b in prog.blocks]
    return ConicProgram(prog.n_vars, prog.objective, blocks, prog.eq_matrix, prog.eq_rhs, prog.names)
