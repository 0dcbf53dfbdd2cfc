"""Primal-dual interior-point method for :class:`ConicProgram`.

Infeasible-start path following with Nesterov-Todd scaling and Mehrotra's
predictor-corrector. The Schur complement and the KKT system are dense; the
programs in this package have at most a couple of thousand variables and
blocks of side 64 or less.
"""

from __future__ import annotations

import functools
import logging

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sps

from .program import ConicProgram, SolveResult, Status

log = logging.getLogger(__name__)


def _popcount(a: np.ndarray) -> np.ndarray:
    out = np.zeros_like(a)
    while np.any(a):
        out += a & 1
        a = a >> 1
    return out


@functools.lru_cache(maxsize=None)
def _transfer_tables(q: int):
    from .. import pauli

    D = 2**q
    idx = np.arange(D)
    xor = idx[:, None] ^ idx[None, :]
    signs = (1 - 2 * (_popcount(idx[:, None] & idx[None, :]) & 1)).astype(float)
    digits = pauli.string_digits(q)
    weights = 1 << np.arange(q - 1, -1, -1)
    xs = ((digits == 1) | (digits == 2)).astype(int) @ weights
    zs = ((digits == 2) | (digits == 3)).astype(int) @ weights
    ny = _popcount(xs & zs)
    phase = (-1j) ** ((ny[:, None] + ny[None, :]) % 4)
    # Re(g * phase) is +-Re(g) or +-Im(g): gather from the float view with a sign
    flat = ((zs[None, :] * D + zs[:, None]) * D + xs[:, None]) * D + xs[None, :]
    use_imag = np.abs(phase.imag) > 0.5
    gather = 2 * flat + use_imag
    sign = np.where(use_imag, -phase.imag, phase.real).real
    return xor, signs, gather, sign


def _pauli_transfer(Winv: np.ndarray, q: int) -> np.ndarray:
    """``T_ab = tr(sigma_a W sigma_b W)`` over all Pauli strings on ``q`` qubits.

    With ``sigma[i, i^x] = (-i)^{#Y} (-1)^{i.z}`` the trace is a two-dimensional
    sign (Walsh-Hadamard) transform of ``W[i^x_a, j] W[j^x_b, i]`` over
    ``(i, j)``, evaluated for all ``(x_a, x_b)`` at once.
    """
    xor, signs, gather, sign = _transfer_tables(q)
    D = 2**q
    A = np.asarray(Winv, dtype=complex)[xor, :]  # [x, i, j] = W[i^x, j]
    G = A.transpose(1, 0, 2)[:, :, None, :] * A.transpose(2, 0, 1)[:, None, :, :]  # [i, xa, xb, j]
    # sign transforms along the leading axis are single real matrix products on the float view
    G = (signs @ G.reshape(D, -1).view(np.float64)).view(complex).reshape(D, D, D, D)  # [za, xa, xb, j]
    G = np.ascontiguousarray(G.transpose(3, 0, 1, 2))  # [j, za, xa, xb]
    G = (signs @ G.reshape(D, -1).view(np.float64)).view(complex).reshape(D, D, D, D)  # [zb, za, xa, xb]
    return np.take(G.reshape(-1).view(np.float64), gather) * sign


class _Block:
    """Per-block data cached for the iterations."""

    def __init__(self, blk, keep: np.ndarray):
        self.d = blk.dim
        coeffs = blk.coeffs[keep]
        self.sparse = coeffs.tocsr()
        self.complex = np.iscomplexobj(coeffs.data) or np.iscomplexobj(blk.constant)
        dtype = complex if self.complex else float
        self.F0 = np.asarray(blk.constant, dtype=dtype)
        self._dense = None
        self.sparse_t = self.sparse.T.tocsr()
        self.q = int(round(np.log2(self.d))) if self.d > 1 else 0
        self.pauli = None
        if self.d > 1 and 2**self.q == self.d and self.d <= 32:
            from .. import pauli

            basis = pauli.sparse_strings(self.q, np.arange(4**self.q))
            C = (self.sparse @ basis.conj().T) / self.d
            self.pauli = sps.csr_matrix(np.real(C))

    @property
    def dense(self):
        if self._dense is None:
            dtype = complex if self.complex else float
            self._dense = np.asarray(self.sparse.toarray(), dtype=dtype).reshape(-1, self.d, self.d)
        return self._dense

    def op(self, x):
        return (self.sparse_t @ x).reshape(self.d, self.d)

    def adj(self, Z):
        return np.real(self.sparse @ Z.T.reshape(-1))

    def schur(self, Winv):
        """``M_ik = Re tr(F_i W^-1 F_k W^-1)``."""
        if self.pauli is not None:
            T = _pauli_transfer(Winv, self.q)
            CT = np.asarray(self.pauli @ T)
            return np.asarray((self.pauli @ CT.T).T)
        B = Winv @ self.dense @ Winv
        n = self.dense.shape[0]
        f = self.dense.reshape(n, -1)
        b = B.reshape(n, -1)
        return np.real(f @ b.conj().T)


def _herm(M):
    return 0.5 * (M + M.conj().T)


def _max_step(L: np.ndarray, D: np.ndarray) -> float:
    """Largest ``a`` with ``L L^H + a D >= 0``."""
    Linv = sla.solve_triangular(L, np.eye(L.shape[0]), lower=True)
    ev = np.linalg.eigvalsh(_herm(Linv @ D @ Linv.conj().T))
    return np.inf if ev[0] >= 0 else -1.0 / ev[0]


def _preprocess_equalities(A, b, tol):
    """Drop dependent rows; report inconsistency."""
    if A.shape[0] == 0:
        return A, b, True
    scale = np.maximum(np.abs(A).max(axis=1), 1e-300)
    nz = np.abs(A).max(axis=1) > 0
    if np.any(np.abs(b[~nz]) > tol):
        return A, b, False
    A, b = A[nz] / scale[nz, None], b[nz] / scale[nz]
    if A.shape[0] == 0:
        return A, b, True
    _, R, piv = sla.qr(A.T, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    rank = int(np.sum(diag > 1e-10 * diag[0]))
    x, *_ = np.linalg.lstsq(A, b, rcond=None)
    consistent = np.max(np.abs(A @ x - b)) <= 1e3 * tol * (1 + np.max(np.abs(b)))
    keep = np.sort(piv[:rank])
    return A[keep], b[keep], consistent


def solve_ipm(prog: ConicProgram, tol: float = 1e-8, max_iter: int = 200) -> SolveResult:
    n = prog.n_vars
    A_full, b_full = prog.eq_matrix, prog.eq_rhs
    c_full = prog.objective

    def result(status, x, y, Z, pobj, dobj, pinf, dinf, it, history, msg=""):
        xf = np.zeros(n)
        xf[active] = x
        return SolveResult(status, xf, pobj, dobj, Z, y, pobj - dobj, pinf, dinf, it, "builtin", history, msg)

    # variables touching nothing are either free with zero cost or make the problem unbounded
    used = np.zeros(n, dtype=bool)
    for blk in prog.blocks:
        used |= np.asarray(abs(blk.coeffs).sum(axis=1)).ravel() > 0
    if A_full.shape[0]:
        used |= np.any(A_full != 0, axis=0)
    active = np.flatnonzero(used)
    if np.any(c_full[~used] != 0):
        return SolveResult(Status.UNBOUNDED, np.zeros(n), -np.inf, -np.inf, [], np.zeros(0),
                           np.nan, np.nan, np.nan, 0, "builtin", [], "unconstrained variable with nonzero cost")

    c = c_full[active]
    A, b, consistent = _preprocess_equalities(A_full[:, active], b_full, tol)
    if not consistent:
        return SolveResult(Status.INFEASIBLE, np.zeros(n), np.inf, np.inf, [], np.zeros(0),
                           np.nan, np.nan, np.nan, 0, "builtin", [], "inconsistent equality constraints")
    m = A.shape[0]
    blocks = [_Block(blk, active) for blk in prog.blocks]
    nu = sum(bk.d for bk in blocks)

    norm_c = np.linalg.norm(c)
    norm_b = np.linalg.norm(b) if m else 0.0
    norm_F0 = np.sqrt(sum(np.linalg.norm(bk.F0) ** 2 for bk in blocks))

    x = np.linalg.lstsq(A, b, rcond=None)[0] if m else np.zeros(len(c))
    y = np.zeros(m)
    zeta = 10.0 * max(1.0, norm_F0, norm_c, norm_b)
    S = [zeta * np.eye(bk.d) for bk in blocks]
    Z = [zeta * np.eye(bk.d) for bk in blocks]
    history = []
    status = Status.MAX_ITER
    pobj = dobj = np.nan
    pinf = dinf = np.inf
    best = None
    stall = 0

    for it in range(max_iter + 1):
        rp = [S[j] - bk.F0 - bk.op(x) for j, bk in enumerate(blocks)]
        rd = c - (A.T @ y if m else 0) - sum(bk.adj(Z[j]) for j, bk in enumerate(blocks))
        re = b - A @ x if m else np.zeros(0)
        mu = sum(np.real(np.sum(S[j] * Z[j].T)) for j in range(len(blocks))) / nu
        pobj = float(c @ x)
        dobj = float((b @ y if m else 0.0) - sum(np.real(np.sum(bk.F0 * Z[j].T)) for j, bk in enumerate(blocks)))
        pinf = np.sqrt(sum(np.linalg.norm(r) ** 2 for r in rp) + np.linalg.norm(re) ** 2) / (1 + norm_F0 + norm_b)
        dinf = np.linalg.norm(rd) / (1 + norm_c)
        rel_gap = abs(pobj - dobj) / (1 + abs(pobj) + abs(dobj))
        history.append({"iter": it, "pobj": pobj, "dobj": dobj, "pinf": pinf, "dinf": dinf, "mu": mu})
        log.debug("it %3d pobj % .10e dobj % .10e pinf %.2e dinf %.2e mu %.2e", it, pobj, dobj, pinf, dinf, mu)

        merit = max(rel_gap, pinf, dinf)
        if best is None or merit < 0.5 * best[0]:
            stall = 0
        else:
            stall += 1
        if best is None or merit < best[0]:
            best = (merit, x.copy(), y.copy(), [z.copy() for z in Z], pobj, dobj, pinf, dinf, it)
        if rel_gap <= tol and pinf <= tol and dinf <= tol and mu * nu / (1 + abs(pobj)) <= 10 * tol:
            status = Status.OPTIMAL
            break
        if not np.isfinite(mu) or not np.isfinite(pobj) or not np.isfinite(dobj):
            log.info("iterates diverged at iteration %d", it)
            break
        # normalised rays: (y, Z) with A^T y + adj Z ~ 0 and b.y - <F0, Z> > 0 certify
        # primal infeasibility; x with A x ~ 0, op(x) ~ PSD and c.x < 0 certify unboundedness
        y_scale = (np.linalg.norm(y) if m else 0.0) + sum(np.linalg.norm(z) for z in Z)
        if y_scale > 1e6 * (1 + norm_c):
            ray = dobj / y_scale
            if ray > tol and (norm_c + np.linalg.norm(rd)) / y_scale <= tol:
                status = Status.INFEASIBLE
                break
        x_scale = np.linalg.norm(x)
        if x_scale > 1e6 * (1 + norm_b + norm_F0):
            ray = -pobj / x_scale
            if ray > tol and (norm_b + np.linalg.norm(re)) / x_scale <= tol:
                status = Status.UNBOUNDED
                break
        if dinf <= tol and dobj > 1e8 * (1 + abs(pobj)) and pinf > tol:
            status = Status.INFEASIBLE
            break
        if pinf <= tol and pobj < -1e8 * (1 + abs(dobj)) and dinf > tol:
            status = Status.UNBOUNDED
            break
        if it == max_iter:
            break
        if stall >= 8 and mu * nu / (1 + abs(pobj)) <= tol:
            log.info("no progress since iteration %d", best[-1])
            break

        # Nesterov-Todd scaling W = R R^H with R^H Z R = R^-1 S R^-H = diag(lam)
        scal = []
        M = np.zeros((len(c), len(c)))
        try:
            for j, bk in enumerate(blocks):
                Ls = np.linalg.cholesky(S[j])
                Lz = np.linalg.cholesky(Z[j])
                U, lam, Vh = np.linalg.svd(Lz.conj().T @ Ls)
                R = Ls @ Vh.conj().T / np.sqrt(lam)[None, :]
                Rinv = (np.sqrt(lam)[:, None] * Vh) @ sla.solve_triangular(Ls, np.eye(bk.d), lower=True)
                Winv = _herm(Rinv.conj().T @ Rinv)
                scal.append((Ls, Lz, lam, R, Rinv, Winv))
                M += bk.schur(Winv)
        except np.linalg.LinAlgError:
            log.info("lost positive definiteness at iteration %d", it)
            break
        M = 0.5 * (M + M.T)
        K = np.zeros((len(c) + m, len(c) + m))
        K[: len(c), : len(c)] = M
        if m:
            K[: len(c), len(c):] = -A.T
            K[len(c):, : len(c)] = A
        K[np.diag_indices(len(c))] += 1e-14 * max(1.0, np.max(np.abs(np.diag(M))))
        lu = sla.lu_factor(K, check_finite=False)

        def direction(Rc):
            rhs1 = -rd.copy()
            for j, bk in enumerate(blocks):
                Winv = scal[j][5]
                rhs1 += bk.adj(Rc[j] + Winv @ rp[j] @ Winv)
            rhs = np.concatenate([rhs1, re])
            sol = sla.lu_solve(lu, rhs, check_finite=False)
            sol += sla.lu_solve(lu, rhs - K @ sol, check_finite=False)
            dx, dy = sol[: len(c)], sol[len(c):]
            dS, dZ = [], []
            for j, bk in enumerate(blocks):
                Winv = scal[j][5]
                dSj = _herm(bk.op(dx) - rp[j])
                dS.append(dSj)
                dZ.append(_herm(Rc[j] - Winv @ dSj @ Winv))
            return dx, dy, dS, dZ

        def steps(dS, dZ):
            ap = min(_max_step(scal[j][0], dS[j]) for j in range(len(blocks)))
            ad = min(_max_step(scal[j][1], dZ[j]) for j in range(len(blocks)))
            return ap, ad

        def rhs_from_scaled(Tlist):
            return [_herm(scal[j][4].conj().T @ Tlist[j] @ scal[j][4]) for j in range(len(blocks))]

        # predictor
        Rc_aff = [-Z[j] for j in range(len(blocks))]
        dx_a, dy_a, dS_a, dZ_a = direction(Rc_aff)
        ap, ad = steps(dS_a, dZ_a)
        ap, ad = min(1.0, ap), min(1.0, ad)
        mu_aff = sum(np.real(np.sum((S[j] + ap * dS_a[j]) * (Z[j] + ad * dZ_a[j]).T)) for j in range(len(blocks))) / nu
        sigma = float(np.clip((mu_aff / mu) ** 3, 0.0, 1.0))

        # corrector: lam o (dS^ + dZ^) = sigma mu I - lam o lam - dS^_a o dZ^_a
        Ts = []
        for j in range(len(blocks)):
            _, _, lam, R, Rinv, _ = scal[j]
            dSh = Rinv @ dS_a[j] @ Rinv.conj().T
            dZh = R.conj().T @ dZ_a[j] @ R
            rhs = sigma * mu * np.eye(len(lam)) - np.diag(lam**2) - 0.5 * (dSh @ dZh + dZh @ dSh)
            Ts.append(2.0 * rhs / (lam[:, None] + lam[None, :]))
        dx, dy, dS, dZ = direction(rhs_from_scaled(Ts))
        ap, ad = steps(dS, dZ)
        gamma = 0.98 if mu > 1e-6 else 0.995
        ap, ad = min(1.0, gamma * ap), min(1.0, gamma * ad)
        x = x + ap * dx
        S = [_herm(S[j] + ap * dS[j]) for j in range(len(blocks))]
        y = y + ad * dy
        Z = [_herm(Z[j] + ad * dZ[j]) for j in range(len(blocks))]
        if max(ap, ad) < 1e-10:
            log.info("step length collapsed at iteration %d", it)
            break

    if status is Status.MAX_ITER and best is not None and best[0] <= 1e3 * tol:
        _, x, y, Z, pobj, dobj, pinf, dinf, it = best
        return result(Status.INACCURATE, x, y, Z, pobj, dobj, pinf, dinf, it, history,
                      f"stopped at accuracy {best[0]:.1e}")
    return result(status, x, y, Z, pobj, dobj, pinf, dinf, it, history)
