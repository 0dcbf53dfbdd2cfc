"""Adapter handing a :class:`ConicProgram` to cvxpy (optional dependency)."""

from __future__ import annotations

import warnings

import numpy as np

from .embed import dual_unembed, embed_block
from .program import ConicProgram, SolveResult, Status

_STATUS = {
    "optimal": Status.OPTIMAL,
    "optimal_inaccurate": Status.INACCURATE,
    "infeasible": Status.INFEASIBLE,
    "infeasible_inaccurate": Status.INFEASIBLE,
    "unbounded": Status.UNBOUNDED,
    "unbounded_inaccurate": Status.UNBOUNDED,
}


def _solver_options(cp, tol: float, max_iter: int) -> tuple[str, dict]:
    installed = cp.installed_solvers()
    if "CLARABEL" in installed:
        return "CLARABEL", {"tol_gap_abs": tol, "tol_gap_rel": tol, "tol_feas": tol, "max_iter": max_iter}
    if "SCS" in installed:
        return "SCS", {"eps_abs": tol, "eps_rel": tol}
    return installed[0], {}


def solve_cvxpy(prog: ConicProgram, tol: float = 1e-8, max_iter: int = 200) -> SolveResult:
    try:
        import cvxpy as cp
    except ImportError as exc:  # pragma: no cover
        raise RuntimeError("the cvxpy backend needs the optional dependency: pip install cvxpy") from exc

    x = cp.Variable(prog.n_vars)
    constraints = []
    complex_flags = []
    for blk in prog.blocks:
        complex_flags.append(blk.is_complex)
        real = embed_block(blk) if blk.is_complex else blk
        d = real.dim
        F = real.coeffs.real.T.tocsr()
        expr = cp.reshape(F @ x, (d, d), order="C") + np.real(real.constant)
        # symmetrise explicitly so cvxpy accepts the expression as a PSD argument
        constraints.append(0.5 * (expr + expr.T) >> 0)
    n_blocks = len(constraints)
    if prog.n_eq:
        constraints.append(prog.eq_matrix @ x == prog.eq_rhs)
    problem = cp.Problem(cp.Minimize(prog.objective @ x), constraints)
    solver, opts = _solver_options(cp, tol, max_iter)
    with warnings.catch_warnings():
        # an inaccurate solve is reported through the status instead
        warnings.simplefilter("ignore", UserWarning)
        problem.solve(solver=solver, **opts)

    status = _STATUS.get(problem.status, Status.MAX_ITER)
    xv = np.zeros(prog.n_vars) if x.value is None else np.asarray(x.value)
    Zs = []
    for flag, con in zip(complex_flags, constraints[:n_blocks]):
        Z = np.asarray(con.dual_value) if con.dual_value is not None else None
        if Z is not None and flag:
            Z = dual_unembed(Z)
        Zs.append(Z)
    # cvxpy reports equality multipliers with the opposite sign convention
    y = np.zeros(prog.n_eq)
    if prog.n_eq and constraints[-1].dual_value is not None:
        y = -np.asarray(constraints[-1].dual_value)
    pobj = float(prog.objective @ xv) if x.value is not None else float(problem.value)
    dobj, dinf = pobj, np.nan
    if (status is Status.OPTIMAL or status is Status.INACCURATE) and all(Z is not None for Z in Zs):
        dobj = float(prog.eq_rhs @ y) - sum(float(np.real(np.sum(b.constant * Z.T))) for b, Z in zip(prog.blocks, Zs))
        rd = prog.objective - prog.eq_matrix.T @ y - sum(b.adjoint(Z) for b, Z in zip(prog.blocks, Zs))
        dinf = float(np.linalg.norm(rd) / (1 + np.linalg.norm(prog.objective)))
    stats = problem.solver_stats
    pinf = prog.primal_residual(xv) if x.value is not None else np.nan
    return SolveResult(status, xv, pobj, dobj, Zs, y, pobj - dobj, pinf, dinf,
                       int(stats.num_iters or 0), f"cvxpy/{solver}", [], problem.status)
