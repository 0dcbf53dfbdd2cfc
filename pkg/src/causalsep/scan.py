"""Two-dimensional slices through the space of process matrices.

Three anchors ``a1, a2, a3`` span the plane; the point at ``(x, y)`` is

    (a2 + a3)/2 + x (a2 - a3) + y (a1 - (a2 + a3)/2)

so ``(0, 1)`` is ``a1`` and ``(+-1/2, 0)`` are ``a2`` and ``a3``.
"""

from __future__ import annotations

import csv
import dataclasses
import io
from concurrent.futures import ProcessPoolExecutor
from typing import Iterable, Sequence

import numpy as np

from .robustness import construct_witness, solve_primal
from .spaces import Scenario
from .tensor import Operator, as_operator, min_eigenvalue

HEADER = ("x", "y", "min_eig", "separable", "r_star", "witness_value")
#: ``|r*|`` at or below this is reported as lying on the boundary
BOUNDARY_BAND = 1e-6


@dataclasses.dataclass(frozen=True)
class ScanRow:
    x: float
    y: float
    min_eig: float
    separable: str
    r_star: float
    witness_value: float | None

    def as_tuple(self) -> tuple:
        wv = "" if self.witness_value is None else repr(self.witness_value)
        return (repr(self.x), repr(self.y), repr(self.min_eig), self.separable, repr(self.r_star), wv)


def verdict(r_star: float, band: float = BOUNDARY_BAND) -> str:
    if abs(r_star) <= band:
        return "boundary"
    return "yes" if r_star < 0 else "no"


def slice_point(anchors: Sequence[Operator], x: float, y: float) -> Operator:
    a1, a2, a3 = anchors
    c = (a2 + a3) * 0.5
    return c + (a2 - a3) * x + (a1 - c) * y


def grid(res, bounds=(-0.5, 0.5, 0.0, 1.0)) -> list[tuple[float, float]]:
    """Row-major points: ``y`` is the slow index, ``x`` the fast one."""
    nx, ny = (res, res) if np.isscalar(res) else res
    x0, x1, y0, y1 = bounds
    xs = np.linspace(x0, x1, int(nx)) if nx > 1 else np.array([x0])
    ys = np.linspace(y0, y1, int(ny)) if ny > 1 else np.array([y0])
    return [(float(x), float(y)) for y in ys for x in xs]


def _evaluate(args) -> ScanRow:
    anchors, x, y, restriction, tol = args
    W = slice_point(anchors, x, y)
    lam = min_eigenvalue(W)
    r, _, _ = solve_primal(W, None, tol=tol)
    wv = None
    if restriction is not None:
        _, wv = construct_witness(W, None, restriction, tol=tol)
    return ScanRow(x, y, lam, verdict(r), float(r), None if wv is None else float(wv))


def scan_slice(anchors: Sequence, res=11, bounds=(-0.5, 0.5, 0.0, 1.0), restriction: str | None = None,
               tol: float = 1e-8, workers: int = 1) -> list[ScanRow]:
    """Evaluate every grid point; rows come back in grid order whatever ``workers`` is."""
    ops = [as_operator(a) for a in anchors]
    if len(ops) != 3:
        raise ValueError("a slice needs exactly three anchors")
    kinds = {Scenario.of(op.layout).kind for op in ops}
    if len(kinds) != 1:
        raise ValueError("anchors belong to different scenarios")
    jobs = [(ops, x, y, restriction, tol) for x, y in grid(res, bounds)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_evaluate, jobs))
    return [_evaluate(j) for j in jobs]


def write_csv(rows: Iterable[ScanRow], stream=None) -> str:
    buf = io.StringIO() if stream is None else stream
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(HEADER)
    for row in rows:
        writer.writerow(row.as_tuple())
    return buf.getvalue() if stream is None else ""
