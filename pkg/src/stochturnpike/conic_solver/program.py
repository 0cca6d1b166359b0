"""Problem, settings and result containers for the conic solvers."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp


class Status(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    MAX_ITER = "max_iter"
    NUMERICAL_ERROR = "numerical_error"


@dataclass(frozen=True)
class SocConstraint:
    """``||F z + g||_2 <= c^T z + d``."""

    F: sp.csr_matrix
    g: np.ndarray
    c: np.ndarray
    d: float

    def __post_init__(self):
        F = sp.csr_matrix(self.F, dtype=float)
        if F.shape[0] < 1:
            raise ValueError("SOC constraint needs at least one row")
        g = np.asarray(self.g, dtype=float).reshape(-1)
        c = np.asarray(self.c, dtype=float).reshape(-1)
        if g.size != F.shape[0] or c.size != F.shape[1]:
            raise ValueError("inconsistent SOC constraint dimensions")
        object.__setattr__(self, "F", F)
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "d", float(self.d))

    @property
    def size(self) -> int:
        return 1 + self.F.shape[0]

    def violation(self, z: np.ndarray) -> float:
        return max(0.0, float(np.linalg.norm(self.F @ z + self.g) - (self.c @ z + self.d)))


@dataclass
class ConicProgram:
    """``min 1/2 z'Pz + q'z  s.t.  Aeq z = beq,  z in every SOC constraint``."""

    P: sp.spmatrix
    q: np.ndarray
    Aeq: sp.spmatrix
    beq: np.ndarray
    cones: list[SocConstraint] = field(default_factory=list)

    def __post_init__(self):
        self.q = np.asarray(self.q, dtype=float).reshape(-1)
        n = self.q.size
        self.P = sp.csc_matrix(self.P, dtype=float)
        if self.Aeq is None:
            self.Aeq = sp.csc_matrix((0, n))
        self.Aeq = sp.csc_matrix(self.Aeq, dtype=float)
        self.beq = np.asarray(self.beq, dtype=float).reshape(-1)
        if self.P.shape != (n, n) or self.Aeq.shape[1] != n or self.Aeq.shape[0] != self.beq.size:
            raise ValueError("inconsistent conic program dimensions")
        if abs(self.P - self.P.T).max() > 1e-12 * max(1.0, abs(self.P).max()):
            raise ValueError("P must be symmetric")
        if np.any(self.P.diagonal() < 0):
            raise ValueError("P must be positive semidefinite")
        for cone in self.cones:
            if cone.F.shape[1] != n:
                raise ValueError("SOC constraint width does not match the variable count")

    @property
    def n(self) -> int:
        return self.q.size

    def objective(self, z: np.ndarray) -> float:
        return float(0.5 * z @ (self.P @ z) + self.q @ z)


@dataclass(frozen=True)
class SolverSettings:
    max_iter: int = 50_000
    eps_primal: float = 1e-8
    eps_dual: float = 1e-8
    rho: float = 0.1
    sigma: float = 1e-6
    over_relaxation: float = 1.6
    scaling_iter: int = 15
    adaptive_rho: bool = True
    check_every: int = 25
    eps_infeasible: float = 1e-9

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError("max_iter must be positive")
        if not (self.eps_primal > 0 and self.eps_dual > 0):
            raise ValueError("tolerances must be positive")
        if not self.rho > 0:
            raise ValueError("rho must be positive")
        if not 0 < self.over_relaxation < 2:
            raise ValueError("over_relaxation must lie in (0, 2)")


@dataclass
class Solution:
    z: np.ndarray
    objective: float
    status: Status
    iterations: int
    primal_residual: float
    dual_residual: float
    gap: float
    message: str = ""
    multipliers: np.ndarray | None = None

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL
