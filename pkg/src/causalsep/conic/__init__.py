"""Semidefinite programming: problem containers, a built-in solver and adapters."""

from __future__ import annotations

from .program import ConicProgram, PSDBlock, SolveResult, Status

BACKENDS = ("builtin", "cvxpy")


def solve(program: ConicProgram, tol: float = 1e-8, max_iter: int = 200, backend: str = "builtin") -> SolveResult:
    """Solve ``program`` with the chosen backend.

    ``"builtin"`` is the interior-point method in :mod:`.ipm`; ``"cvxpy"``
    hands the same program to cvxpy (optional dependency) and is used as an
    independent cross-check.
    """
    if backend == "builtin":
        from .ipm import solve_ipm

        return solve_ipm(program, tol=tol, max_iter=max_iter)
    if backend == "cvxpy":
        from .cvx import solve_cvxpy

        return solve_cvxpy(program, tol=tol, max_iter=max_iter)
    raise ValueError(f"unknown backend {backend!r}; choose from {BACKENDS}")


__all__ = ["ConicProgram", "PSDBlock", "SolveResult", "Status", "solve", "BACKENDS"]
