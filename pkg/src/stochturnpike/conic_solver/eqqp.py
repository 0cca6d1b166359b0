"""Direct KKT solve for equality-constrained convex QPs."""
from __future__ import annotations

import warnings

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .program import Solution, Status


def _kkt(P, Aeq, reg=0.0):
    m = Aeq.shape[0]
    lower = -reg * sp.identity(m, format="csc") if reg else sp.csc_matrix((m, m))
    return sp.bmat([[P, Aeq.T], [Aeq, lower]], format="csc")


def solve_eq_qp(P, q, Aeq=None, beq=None, tol: float = 1e-8) -> Solution:
    """Minimize ``1/2 z'Pz + q'z`` subject to ``Aeq z = beq``.

    One sparse LU factorization of the KKT matrix. A singular KKT system is
    retried with a small dual regularization plus iterative refinement; if
    that does not reproduce ``Aeq z = beq`` the equalities are reported
    inconsistent.
    """
    q = np.asarray(q, dtype=float).reshape(-1)
    n = q.size
    P = sp.csc_matrix(P, dtype=float)
    Aeq = sp.csc_matrix((0, n)) if Aeq is None else sp.csc_matrix(Aeq, dtype=float)
    beq = np.zeros(0) if beq is None else np.asarray(beq, dtype=float).reshape(-1)
    m = Aeq.shape[0]
    rhs = np.concatenate([-q, beq])

    def residuals(z, nu):
        rp = float(np.max(np.abs(Aeq @ z - beq), initial=0.0))
        rd = float(np.max(np.abs(P @ z + q + Aeq.T @ nu), initial=0.0))
        return rp, rd

    try:
        with warnings.catch_warnings():
            warnings.simplefilter("error", spla.MatrixRankWarning)
            lu = spla.splu(_kkt(P, Aeq))
        sol = lu.solve(rhs)
        if not np.all(np.isfinite(sol)):
            raise RuntimeError("non-finite KKT solution")
        z, nu = sol[:n], sol[n:]
        # one refinement step against the exact KKT operator
        K = _kkt(P, Aeq)
        sol = sol + lu.solve(rhs - K @ sol)
        z, nu = sol[:n], sol[n:]
        rp, rd = residuals(z, nu)
        status, msg = Status.OPTIMAL, ""
    except (RuntimeError, spla.MatrixRankWarning):
        K = _kkt(P, Aeq)
        try:
            lu = spla.splu(_kkt(P, Aeq, reg=1e-10) + 1e-12 * sp.identity(n + m, format="csc"))
        except RuntimeError:
            return Solution(np.full(n, np.nan), np.nan, Status.NUMERICAL_ERROR, 0,
                            np.inf, np.inf, np.inf, "singular KKT matrix")
        sol = np.zeros(n + m)
        for _ in range(50):
            sol = sol + lu.solve(rhs - K @ sol)
        z, nu = sol[:n], sol[n:]
        rp, rd = residuals(z, nu)
        if not np.all(np.isfinite(sol)):
            return Solution(np.full(n, np.nan), np.nan, Status.NUMERICAL_ERROR, 0,
                            np.inf, np.inf, np.inf, "singular KKT matrix")
        if rp > tol * max(1.0, np.abs(beq).max(initial=0.0)):
            return Solution(z, np.nan, Status.INFEASIBLE, 0, rp, rd, np.nan,
                            f"equality constraints inconsistent (rank-deficient Aeq, residual {rp:.3g})")
        if rd > 1e3 * tol * max(1.0, np.abs(q).max(initial=0.0)):
            return Solution(z, np.nan, Status.NUMERICAL_ERROR, 0, rp, rd, np.nan,
                            "singular KKT matrix: objective unbounded on the feasible set")
        status, msg = Status.OPTIMAL, "rank-deficient Aeq handled by regularization"
    obj = float(0.5 * z @ (P @ z) + q @ z)
    return Solution(z, obj, status, 1, rp, rd, 0.0, msg, multipliers=nu)
