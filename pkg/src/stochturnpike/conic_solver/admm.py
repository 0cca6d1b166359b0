"""ADMM for convex QPs with linear equalities and second-order cones.

The problem is brought into the operator-splitting form

    min 1/2 x'Px + q'x   s.t.  A x = v,  v in C = b - K,

where ``K`` is the product of the zero cone (equalities) and one
second-order cone per ``SocConstraint``. Each iteration solves one
quasi-definite KKT system with a cached sparse factorization and projects
onto ``C``; the projection and dual update run in the compiled kernel.
"""
from __future__ import annotations

import logging

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import kernels
from .program import ConicProgram, Solution, SolverSettings, Status

log = logging.getLogger(__name__)

_RHO_EQ_FACTOR = 1e3
_RHO_MIN, _RHO_MAX = 1e-6, 1e6


def soc_project(point) -> np.ndarray:
    """Euclidean projection of ``(t, x)`` onto ``{(t, x): ||x|| <= t}``."""
    out = np.array(point, dtype=float).reshape(-1).copy()
    kernels.soc_project_blocks(out, np.array([0], dtype=np.intp), np.array([out.size], dtype=np.intp))
    return out


def _stack(cp: ConicProgram):
    rows, rhs, starts, sizes = [cp.Aeq], [cp.beq], [], []
    offset = cp.Aeq.shape[0]
    for cone in cp.cones:
        rows.append(sp.vstack([-sp.csr_matrix(cone.c), -cone.F]))
        rhs.append(np.concatenate([[cone.d], cone.g]))
        starts.append(offset)
        sizes.append(cone.size)
        offset += cone.size
    A = sp.vstack(rows, format="csc") if rows else sp.csc_matrix((0, cp.n))
    return (
        A,
        np.concatenate(rhs) if rhs else np.zeros(0),
        np.asarray(starts, dtype=np.intp),
        np.asarray(sizes, dtype=np.intp),
    )


def _ruiz(P, A, m_eq, starts, sizes, iters):
    """Modified Ruiz equilibration; cone rows share one scale per block."""
    n, m = P.shape[0], A.shape[0]
    D, E = np.ones(n), np.ones(m)
    Ps, As = P.copy(), A.copy()
    block_id = np.repeat(np.arange(len(sizes)), sizes)
    for _ in range(iters):
        col_P = np.abs(Ps).max(axis=0).toarray().ravel() if n else np.zeros(0)
        col_A = np.abs(As).max(axis=0).toarray().ravel() if m else np.zeros(n)
        row_A = np.abs(As).max(axis=1).toarray().ravel() if m else np.zeros(0)
        dn = np.maximum(col_P, col_A)
        dn = 1.0 / np.sqrt(np.where(dn < 1e-4, 1.0, np.minimum(dn, 1e4)))
        dm = np.where(row_A < 1e-4, 1.0, np.minimum(row_A, 1e4))
        if len(sizes):
            blk = np.maximum.reduceat(dm[m_eq:], starts - m_eq)
            dm[m_eq:] = blk[block_id]
        dm = 1.0 / np.sqrt(dm)
        Dm, Dn = sp.diags(dm), sp.diags(dn)
        Ps = (Dn @ Ps @ Dn).tocsc()
        As = (Dm @ As @ Dn).tocsc()
        D *= dn
        E *= dm
    return Ps, As, D, E


class _Workspace:
    def __init__(self, cp: ConicProgram, settings: SolverSettings):
        self.settings = settings
        A, b, starts, sizes = _stack(cp)
        self.m_eq = cp.Aeq.shape[0]
        self.starts, self.sizes = starts, sizes
        self.P_raw, self.q_raw, self.A_raw, self.b_raw = cp.P, cp.q, A, b
        P, A, self.D, self.E = _ruiz(cp.P, A, self.m_eq, starts, sizes, settings.scaling_iter)
        q = self.D * cp.q
        col_norm = np.abs(P).max(axis=0).toarray().ravel().mean() if P.nnz else 0.0
        c = max(col_norm, np.abs(q).max(initial=0.0))
        self.c = 1.0 / np.clip(c, 1e-4, 1e4) if c > 0 else 1.0
        self.P, self.q = (self.c * P).tocsc(), self.c * q
        self.A, self.b = A, self.E * b
        self.n, self.m = P.shape[0], A.shape[0]
        self.set_rho(settings.rho)

    def set_rho(self, rho):
        self.rho_scalar = float(np.clip(rho, _RHO_MIN, _RHO_MAX))
        rho_vec = np.full(self.m, self.rho_scalar)
        rho_vec[: self.m_eq] *= _RHO_EQ_FACTOR
        self.rho = rho_vec
        sigma = self.settings.sigma
        K = sp.bmat(
            [[self.P + sigma * sp.identity(self.n), self.A.T], [self.A, -sp.diags(1.0 / rho_vec)]],
            format="csc",
        )
        self.lu = spla.splu(K)

    # unscaled residual norms
    def residuals(self, x, v, y):
        Dinv, Einv = 1.0 / self.D, 1.0 / self.E
        Ax = self.A @ x
        prim = np.max(np.abs(Einv * (Ax - v)), initial=0.0)
        Px, Aty = self.P @ x, self.A.T @ y
        dual = np.max(np.abs(Dinv * (Px + self.q + Aty)), initial=0.0) / self.c
        scales = (
            max(np.max(np.abs(Einv * Ax), initial=0.0), np.max(np.abs(Einv * v), initial=0.0), 1e-30),
            max(
                np.max(np.abs(Dinv * Px), initial=0.0),
                np.max(np.abs(Dinv * Aty), initial=0.0),
                np.max(np.abs(Dinv * self.q), initial=0.0),
                1e-30,
            )
            / self.c,
        )
        return prim, dual, scales


def _in_dual_cone(dy, starts, sizes, tol):
    proj = dy.copy()
    if len(starts):
        kernels.soc_project_blocks(proj, starts, sizes)
    return np.max(np.abs(proj - dy), initial=0.0) <= tol


def solve(cp: ConicProgram, settings: SolverSettings | None = None) -> Solution:
    """Solve ``cp`` by ADMM; see the module docstring for the splitting."""
    settings = settings or SolverSettings()
    n = cp.n
    if cp.Aeq.shape[0] == 0 and not cp.cones:
        from .eqqp import solve_eq_qp

        return solve_eq_qp(cp.P, cp.q)
    try:
        ws = _Workspace(cp, settings)
    except RuntimeError as exc:
        return Solution(np.full(n, np.nan), np.nan, Status.NUMERICAL_ERROR, 0,
                        np.inf, np.inf, np.inf, f"KKT factorization failed: {exc}")
    m, m_eq = ws.m, ws.m_eq
    alpha, sigma = settings.over_relaxation, settings.sigma
    x, v, y = np.zeros(n), np.zeros(m), np.zeros(m)
    work = np.empty(m)
    cone_starts, cone_sizes = ws.starts, ws.sizes
    y_cone_starts = cone_starts - m_eq
    rhs = np.empty(n + m)
    status, message = Status.MAX_ITER, f"iteration limit {settings.max_iter} reached"
    prim = dual = np.inf
    it = 0
    for it in range(1, settings.max_iter + 1):
        x_prev, y_prev = x, y.copy()
        rhs[:n] = sigma * x - ws.q
        rhs[n:] = v - y / ws.rho
        sol = ws.lu.solve(rhs)
        xt, nu = sol[:n], sol[n:]
        vt = v + (nu - y) / ws.rho
        x = alpha * xt + (1.0 - alpha) * x
        kernels.cone_update(vt, v, y, ws.b, ws.rho, alpha, m_eq, cone_starts, cone_sizes, work)

        if it % settings.check_every and it != settings.max_iter:
            continue
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            status, message = Status.NUMERICAL_ERROR, "iterates diverged to non-finite values"
            break
        prim, dual, (sp_, sd_) = ws.residuals(x, v, y)
        if prim <= settings.eps_primal and dual <= settings.eps_dual:
            status, message = Status.OPTIMAL, ""
            break
        # divergence certificates (heuristic, in scaled space)
        dy = y - y_prev
        ndy = np.max(np.abs(ws.E * dy), initial=0.0)
        if ndy > 0:
            eps = settings.eps_infeasible
            Atdy = np.max(np.abs((1.0 / ws.D) * (ws.A.T @ dy)), initial=0.0)
            if (Atdy <= eps * ndy and ws.b @ dy < -eps * ndy
                    and _in_dual_cone(dy[m_eq:], y_cone_starts, cone_sizes, eps * ndy)):
                status, message = Status.INFEASIBLE, "primal infeasibility certificate"
                break
        dx = x - x_prev
        ndx = np.max(np.abs(ws.D * dx), initial=0.0)
        if ndx > 0:
            eps = settings.eps_infeasible
            Adx = ws.A @ dx
            if (np.max(np.abs((1.0 / ws.D) * (ws.P @ dx)), initial=0.0) <= eps * ndx
                    and ws.q @ dx < -eps * ndx
                    and np.max(np.abs(Adx[:m_eq]), initial=0.0) <= eps * ndx
                    and _in_dual_cone(-Adx[m_eq:], y_cone_starts, cone_sizes, eps * ndx)):
                status, message = Status.INFEASIBLE, "dual infeasibility certificate (unbounded objective)"
                break
        if settings.adaptive_rho and prim > 0 and dual > 0:
            ratio = np.sqrt((prim / sp_) / (dual / sd_))
            if ratio > 5.0 or ratio < 0.2:
                new_rho = ws.rho_scalar * ratio
                if abs(np.log(np.clip(new_rho, _RHO_MIN, _RHO_MAX) / ws.rho_scalar)) > 1e-12:
                    try:
                        ws.set_rho(new_rho)
                    except RuntimeError as exc:
                        status, message = Status.NUMERICAL_ERROR, f"refactorization failed: {exc}"
                        break

    z = ws.D * x
    y_unscaled = ws.E * y / ws.c
    if status is Status.OPTIMAL or status is Status.MAX_ITER:
        obj = cp.objective(z)
        gap = abs(float(z @ (cp.P @ z) + cp.q @ z + ws.b_raw @ y_unscaled))
    else:
        obj, gap = np.nan, np.nan
    log.debug("admm: %s after %d iterations (prim %.2e, dual %.2e, rho %.2e)",
              status.value, it, prim, dual, ws.rho_scalar)
    return Solution(z, obj, status, it, float(prim), float(dual), gap, message,
                    multipliers=y_unscaled)
