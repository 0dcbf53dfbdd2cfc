"""SDPA sparse text export, for handing a program to an external solver.

SDPA solves ``min c.x`` subject to ``sum_i x_i F_i - F_0 >= 0``.  Complex
blocks are written through their real embedding; equalities become a pair
of diagonal (LP) blocks.
"""

from __future__ import annotations

import io
from typing import TextIO

import numpy as np

from .embed import embed_block
from .program import ConicProgram


def _entries(index: int, block: int, M: np.ndarray, out: list[str], diagonal: bool = False):
    if diagonal:
        for k in np.flatnonzero(M):
            out.append(f"{index} {block} {k + 1} {k + 1} {float(M[k])!r}")
        return
    rows, cols = np.nonzero(np.triu(M))
    for r, c in zip(rows, cols):
        out.append(f"{index} {block} {r + 1} {c + 1} {float(M[r, c])!r}")


def write_sdpa(prog: ConicProgram, stream: TextIO | None = None) -> str:
    blocks = [embed_block(b) if b.is_complex else b for b in prog.blocks]
    sizes = [b.dim for b in blocks]
    if prog.n_eq:
        sizes += [-prog.n_eq, -prog.n_eq]
    lines = [f"* exported conic program: {prog.n_vars} variables, {len(prog.blocks)} PSD blocks, {prog.n_eq} equalities",
             str(prog.n_vars), str(len(sizes)), " ".join(map(str, sizes)),
             " ".join(repr(float(c)) for c in prog.objective)]
    body: list[str] = []
    for j, b in enumerate(blocks, start=1):
        _entries(0, j, -np.real(b.constant), body)
        coeffs = b.coeffs.tocsr()
        for i in range(prog.n_vars):
            row = coeffs.getrow(i)
            if row.nnz:
                _entries(i + 1, j, np.real(row.toarray()).reshape(b.dim, b.dim), body)
    if prog.n_eq:
        lo, hi = len(blocks) + 1, len(blocks) + 2
        _entries(0, lo, prog.eq_rhs, body, diagonal=True)
        _entries(0, hi, -prog.eq_rhs, body, diagonal=True)
        for i in range(prog.n_vars):
            col = prog.eq_matrix[:, i]
            if np.any(col):
                _entries(i + 1, lo, col, body, diagonal=True)
                _entries(i + 1, hi, -col, body, diagonal=True)
    text = "\n".join(lines + body) + "\n"
    if stream is not None:
        stream.write(text)
    return text


def read_sdpa(text: str) -> ConicProgram:
    """Parse the subset written by :func:`write_sdpa` (real blocks only)."""
    import scipy.sparse as sps

    from .program import PSDBlock

    rows = [ln for ln in io.StringIO(text).read().splitlines() if ln.strip() and ln[0] not in "*\"'"]
    n = int(rows[0].split()[0])
    sizes = [int(s) for s in rows[2].replace(",", " ").replace("{", " ").replace("}", " ").split()]
    c = np.array([float(s) for s in rows[3].replace(",", " ").split()])
    mats = {}
    for ln in rows[4:]:
        i, blk, r, col, val = ln.split()
        key = (int(i), int(blk))
        d = abs(sizes[int(blk) - 1])
        M = mats.setdefault(key, np.zeros((d, d)))
        r, col, val = int(r) - 1, int(col) - 1, float(val)
        M[r, col] = val
        M[col, r] = val
    blocks, eq_rows, eq_rhs = [], None, None
    for j, size in enumerate(sizes, start=1):
        if size < 0:
            if eq_rows is None:
                eq_rhs = np.diag(mats.get((0, j), np.zeros((-size, -size))))
                eq_rows = np.column_stack([np.diag(mats.get((i, j), np.zeros((-size, -size)))) for i in range(1, n + 1)])
            continue
        F0 = -mats.get((0, j), np.zeros((size, size)))
        coeffs = sps.csr_matrix(np.array([mats.get((i, j), np.zeros((size, size))).reshape(-1) for i in range(1, n + 1)]))
        blocks.append(PSDBlock(F0, coeffs))
    return ConicProgram(n, c, blocks, eq_rows, eq_rhs)
