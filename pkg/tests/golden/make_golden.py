"""Regenerate ``scalar_n3.json`` with an independent convex solver.

Run once, by hand: ``python tests/golden/make_golden.py`` (requires cvxpy).
The problem is written out directly in PCE coefficients, without using the
package's transcription, so that the golden value is an independent check.

Scalar system x+ = 2x + u + w, x0 ~ U[0.6, 1.4], w ~ N(0, 0.25), cost E[u^2],
chance constraint -2 <= E[x] +/- lambda*std(x) <= 2 with lambda(0.8) = 3,
horizon N = 3. Basis: [1, xi - 0.5, theta_0, theta_1, theta_2].
"""
import json
from pathlib import Path

import cvxpy as cp
import numpy as np

N = 3
L1 = N + 2
norms = np.array([1.0, 1.0 / 12.0] + [1.0] * N)
tag = np.array([-1, -1] + list(range(N)))          # time tag per basis index
lam = np.sqrt(1.8 / 0.2)


def build(lb, ub):
    X = cp.Variable((N + 1, L1))
    U = cp.Variable((N, L1))
    cons = [X[0, 0] == 1.0, X[0, 1] == 0.8, X[0, 2:] == 0]
    for k in range(N):
        w = np.zeros(L1)
        w[2 + k] = 0.5
        cons.append(X[k + 1] == 2 * X[k] + U[k] + w)
    for k in range(N + 1):
        for j in range(L1):
            if tag[j] >= k:
                cons.append(X[k, j] == 0)
                if k < N:
                    cons.append(U[k, j] == 0)
    d = np.sqrt(norms[1:])
    for k in range(1, N + 1):
        s = cp.norm(cp.multiply(d, X[k, 1:]))
        cons += [lam * s <= ub - X[k, 0], lam * s <= X[k, 0] - lb]
    obj = sum(cp.sum_squares(cp.multiply(np.sqrt(norms), U[k])) for k in range(N))
    return cp.Problem(cp.Minimize(obj), cons)


def main():
    lb, ub = -2.0, 2.0
    prob = build(lb, ub)
    prob.solve(solver=cp.CLARABEL, tol_gap_abs=1e-9, tol_gap_rel=1e-9, tol_feas=1e-9)
    free = build(-np.inf, np.inf)
    free.solve(solver=cp.CLARABEL)
    out = {
        "description": "scalar example, N=3, state bounds [lb, ub], epsilon_x=0.8, cost E[u^2]",
        "N": N,
        "lb": lb,
        "ub": ub,
        "epsilon_x": 0.8,
        "objective": prob.value,
        "unconstrained_objective": free.value,
        "solver": f"cvxpy {cp.__version__} / CLARABEL",
    }
    path = Path(__file__).with_name("scalar_n3.json")
    path.write_text(json.dumps(out, indent=2) + "\n")
    print(json.dumps(out, indent=2))


if __name__ == "__main__":
    main()
