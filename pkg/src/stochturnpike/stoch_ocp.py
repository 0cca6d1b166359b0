"""Stochastic LQ optimal control problems and their PCE transcription.

Random states and inputs are described by degree-one PCE coefficients over
a horizon-dependent joint germ space (initial-condition germs followed by
one germ per noise channel and time step). Galerkin projection of the
linear dynamics gives one deterministic recursion per basis index, the
expected-value/variance stage cost becomes a convex quadratic in the
coefficients, and each mean +/- lambda * std chance constraint is a
second-order cone.

Causality is structural: the coefficients of ``X(k)`` and ``U(k)`` on noise
germs with time tag ``>= k`` are not decision variables at all.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from . import pce
from .conic_solver import ConicProgram, SocConstraint, Solution, SolverSettings, Status, solve, solve_eq_qp
from .pce import GermComponent, GermFamily, GermRealization, GermSpace, Normal, PceVector, Uniform

__all__ = [
    "LinearStochasticSystem",
    "StageCost",
    "Bound",
    "ChanceConstraintSpec",
    "NoiseSpec",
    "StochasticOcp",
    "PceTrajectory",
    "SteadyStatePce",
    "OcpResult",
    "Realization",
    "SolverError",
    "build_joint_basis",
    "lambda_of_epsilon",
    "galerkin_transcribe",
    "solve_ocp",
    "steady_state",
    "realize_trajectory",
    "realize_many",
]


class SolverError(RuntimeError):
    """Raised when the underlying conic solve does not reach optimality."""

    def __init__(self, message: str, solution: Solution | None = None):
        super().__init__(message)
        self.solution = solution


def _mat(a, shape=None, name="matrix"):
    a = np.atleast_2d(np.asarray(a, dtype=float))
    if shape is not None and a.shape != shape:
        raise ValueError(f"{name} has shape {a.shape}, expected {shape}")
    return a


def _vec(a, n, name):
    a = np.asarray(a, dtype=float).reshape(-1)
    if a.size != n:
        raise ValueError(f"{name} has length {a.size}, expected {n}")
    return a


def _columns(a, nx, name):
    """Matrix with ``nx`` rows; a 1-D input of length ``nx`` is one column."""
    a = np.asarray(a, dtype=float)
    if a.ndim < 2:
        a = a.reshape(nx, -1)
    if a.ndim != 2 or a.shape[0] != nx:
        raise ValueError(f"{name} has shape {a.shape}, expected {nx} rows")
    return a


@dataclass(frozen=True)
class LinearStochasticSystem:
    """``X(k+1) = A X(k) + B U(k) + E W(k)``."""

    A: np.ndarray
    B: np.ndarray
    E: np.ndarray

    def __post_init__(self):
        A = _mat(self.A, name="A")
        if A.shape[0] != A.shape[1]:
            raise ValueError("A must be square")
        nx = A.shape[0]
        B = _columns(self.B, nx, "B")
        E = _columns(self.E, nx, "E") if np.size(self.E) else np.zeros((nx, 0))
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "E", E)

    @property
    def nx(self) -> int:
        return self.A.shape[0]

    @property
    def nu(self) -> int:
        return self.B.shape[1]

    @property
    def nw(self) -> int:
        return self.E.shape[1]


@dataclass(frozen=True)
class StageCost:
    """``E[x'Qx x + qx'x + u'Ru u + ru'u] + gamma_x'V[x] + gamma_u'V[u]``."""

    Qx: np.ndarray
    qx: np.ndarray
    Ru: np.ndarray
    ru: np.ndarray
    gamma_x: np.ndarray
    gamma_u: np.ndarray

    def __post_init__(self):
        Qx = _mat(self.Qx, name="Qx")
        Ru = _mat(self.Ru, name="Ru")
        nx, nu = Qx.shape[0], Ru.shape[0]
        for M, nm in ((Qx, "Qx"), (Ru, "Ru")):
            if M.shape[0] != M.shape[1] or not np.allclose(M, M.T):
                raise ValueError(f"{nm} must be symmetric")
            if M.size and np.linalg.eigvalsh(M).min() < -1e-12:
                raise ValueError(f"{nm} must be positive semidefinite")
        gx, gu = _vec(self.gamma_x, nx, "gamma_x"), _vec(self.gamma_u, nu, "gamma_u")
        if np.any(gx < 0) or np.any(gu < 0):
            raise ValueError("variance weights must be nonnegative")
        object.__setattr__(self, "Qx", Qx)
        object.__setattr__(self, "Ru", Ru)
        object.__setattr__(self, "qx", _vec(self.qx, nx, "qx"))
        object.__setattr__(self, "ru", _vec(self.ru, nu, "ru"))
        object.__setattr__(self, "gamma_x", gx)
        object.__setattr__(self, "gamma_u", gu)

    @classmethod
    def make(cls, nx, nu, Qx=None, qx=None, Ru=None, ru=None, gamma_x=None, gamma_u=None):
        return cls(
            np.zeros((nx, nx)) if Qx is None else Qx,
            np.zeros(nx) if qx is None else qx,
            np.zeros((nu, nu)) if Ru is None else Ru,
            np.zeros(nu) if ru is None else ru,
            np.zeros(nx) if gamma_x is None else gamma_x,
            np.zeros(nu) if gamma_u is None else gamma_u,
        )

    def evaluate(self, X: PceVector, U: PceVector) -> float:
        """Exact stage cost of the random pair ``(X, U)``."""
        return (_part_cost(X.coeffs, X.space.norms, self.Qx, self.qx, self.gamma_x)
                + _part_cost(U.coeffs, U.space.norms, self.Ru, self.ru, self.gamma_u))


def _part_cost(c, norms, Q, lin, gam):
    # E[z'Qz] = m'Qm + sum_j norms[j] z_j'Q z_j for orthogonal basis columns z_j
    out = float(c[:, 0] @ Q @ c[:, 0] + lin @ c[:, 0])
    out += float(np.einsum("ij,ik,kj,j->", c[:, 1:], Q, c[:, 1:], norms[1:]))
    out += float(gam @ ((c[:, 1:] ** 2) @ norms[1:]))
    return out


@dataclass(frozen=True)
class Bound:
    """Two-sided (or one-sided) bound on one component.

    With ``hard=True`` the bound applies to the mean only (the std term is
    dropped), which is also what happens automatically for a component
    that carries no randomness.
    """

    lb: float | None = None
    ub: float | None = None
    hard: bool = False

    def __post_init__(self):
        if self.lb is not None and self.ub is not None and not self.lb < self.ub:
            raise ValueError(f"bound requires lb < ub, got [{self.lb}, {self.ub}]")


@dataclass(frozen=True)
class ChanceConstraintSpec:
    state_bounds: tuple[Bound | None, ...] = ()
    input_bounds: tuple[Bound | None, ...] = ()
    epsilon_x: float = 0.0
    epsilon_u: float = 0.0

    def __post_init__(self):
        for eps, nm in ((self.epsilon_x, "epsilon_x"), (self.epsilon_u, "epsilon_u")):
            if not 0.0 <= eps < 1.0:
                raise ValueError(f"{nm} must lie in [0, 1), got {eps}")
        object.__setattr__(self, "state_bounds", tuple(self.state_bounds))
        object.__setattr__(self, "input_bounds", tuple(self.input_bounds))

    def states(self, nx):
        return _padded(self.state_bounds, nx, "state_bounds")

    def inputs(self, nu):
        return _padded(self.input_bounds, nu, "input_bounds")

    @property
    def empty(self) -> bool:
        return not any(b is not None and (b.lb is not None or b.ub is not None)
                       for b in self.state_bounds + self.input_bounds)


def _padded(bounds, n, name):
    if len(bounds) > n:
        raise ValueError(f"{name} has {len(bounds)} entries for {n} components")
    return tuple(bounds) + (None,) * (n - len(bounds))


@dataclass(frozen=True)
class NoiseSpec:
    """Per-channel law of the i.i.d. disturbance ``W(k)``."""

    channels: tuple[Normal | Uniform, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "channels", tuple(self.channels))
        for ch in self.channels:
            if not isinstance(ch, (Normal, Uniform)):
                raise TypeError("noise channels must be Normal or Uniform laws")

    @property
    def nw(self) -> int:
        return len(self.channels)

    def germ(self, channel: int, k: int | None) -> GermComponent:
        tag = f"@{k}" if k is not None else ""
        return GermComponent(f"w{channel}{tag}", self.channels[channel].family,
                             time_tag=0 if k is None else k, channel=channel)


@dataclass(frozen=True)
class StochasticOcp:
    system: LinearStochasticSystem
    cost: StageCost
    N: int
    x0: PceVector
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    constraints: ChanceConstraintSpec = field(default_factory=ChanceConstraintSpec)

    def __post_init__(self):
        s = self.system
        if self.N < 1:
            raise ValueError("horizon N must be >= 1")
        if self.x0.n != s.nx:
            raise ValueError("initial condition dimension does not match A")
        if self.noise.nw != s.nw:
            raise ValueError(f"noise spec has {self.noise.nw} channels, E has {s.nw} columns")
        if self.cost.Qx.shape[0] != s.nx or self.cost.Ru.shape[0] != s.nu:
            raise ValueError("stage cost dimensions do not match the system")
        if any(c.is_noise for c in self.x0.space.components):
            raise ValueError("initial condition may not use noise germs")
        self.constraints.states(s.nx)
        self.constraints.inputs(s.nu)

    def with_horizon(self, N: int) -> "StochasticOcp":
        return replace(self, N=int(N))


def lambda_of_epsilon(eps: float) -> float:
    """Std multiplier of the mean +/- lambda * std chance-constraint approximation."""
    if not 0.0 <= eps < 1.0:
        raise ValueError(f"epsilon must lie in [0, 1), got {eps}")
    return math.sqrt((1.0 + eps) / (1.0 - eps))


def build_joint_basis(ocp: StochasticOcp) -> GermSpace:
    """Initial germs, then ``n_w`` noise germs per time step (time-major)."""
    noise = tuple(ocp.noise.germ(c, k) for k in range(ocp.N) for c in range(ocp.noise.nw))
    clash = set(ocp.x0.space.ids) & {g.id for g in noise}
    if clash:
        raise ValueError(f"initial-condition germ ids collide with noise germs: {sorted(clash)}")
    return GermSpace(ocp.x0.space.components + noise)


def noise_coefficients(noise: NoiseSpec, space: GermSpace, steps: Sequence[int | None]) -> np.ndarray:
    """Known PCE coefficients of ``W(k)`` for each entry of ``steps``, ``(len, n_w, dim)``."""
    W = np.zeros((len(steps), noise.nw, space.dim))
    for i, k in enumerate(steps):
        for c, law in enumerate(noise.channels):
            m0, m1 = law.coefficients()
            W[i, c, 0] = m0
            W[i, c, space.index_of(noise.germ(c, k).id)] = m1
    return W


# -- transcription ------------------------------------------------------------


@dataclass(frozen=True)
class IndexMap:
    """Where each non-masked coefficient lives in the decision vector.

    ``x_cols[k]`` / ``u_cols[k]`` list the basis indices free at time ``k``;
    ``x_off[k]`` is the offset of the ``nx * len(x_cols[k])`` block of
    ``X(k)`` (row-major: component, then basis index). ``X(0)`` is data.
    """

    space: GermSpace
    nx: int
    nu: int
    x_cols: tuple[np.ndarray, ...]
    u_cols: tuple[np.ndarray, ...]
    x_off: np.ndarray
    u_off: np.ndarray
    n: int

    def x_index(self, k: int) -> np.ndarray:
        """Decision indices of ``X(k)``, shape ``(nx, len(x_cols[k]))``."""
        w = len(self.x_cols[k])
        return self.x_off[k] + np.arange(self.nx * w).reshape(self.nx, w)

    def u_index(self, k: int) -> np.ndarray:
        w = len(self.u_cols[k])
        return self.u_off[k] + np.arange(self.nu * w).reshape(self.nu, w)

    def causality_mask(self) -> np.ndarray:
        """``mask[k, j]`` is True where basis index ``j`` may be nonzero at time ``k``."""
        N = len(self.u_cols)
        mask = np.zeros((N + 1, self.space.dim), dtype=bool)
        for k in range(N + 1):
            mask[k, self.x_cols[k]] = True
        return mask


def _index_map(space: GermSpace, N: int, nx: int, nu: int) -> IndexMap:
    tags = space.time_tags()
    allowed = [np.flatnonzero(tags < k) for k in range(N + 1)]
    x_off = np.zeros(N + 1, dtype=int)
    u_off = np.zeros(N, dtype=int)
    pos = 0
    x_off[0] = -1
    for k in range(1, N + 1):
        x_off[k] = pos
        pos += nx * len(allowed[k])
    for k in range(N):
        u_off[k] = pos
        pos += nu * len(allowed[k])
    return IndexMap(space, nx, nu, tuple(allowed), tuple(allowed[:N]), x_off, u_off, pos)


@dataclass
class Transcription:
    program: ConicProgram
    index: IndexMap
    constant: float
    x0: np.ndarray
    W: np.ndarray


class _Builder:
    def __init__(self, n):
        self.n = n
        self.rows, self.cols, self.vals, self.rhs = [], [], [], []
        self.m = 0
        self.P_diag_blocks = []  # (index array (r, w), weight matrix (r, r), per-col scale (w,))
        self.q = np.zeros(n)

    def add_eq(self, terms, rhs):
        """``terms``: list of (index array shaped (r, w), matrix (r', r)); rows r' x w."""
        r_out = None
        for idx, M in terms:
            M = np.atleast_2d(M)
            r_out, w = M.shape[0], idx.shape[1]
            row_ids = self.m + np.arange(r_out * w).reshape(r_out, w)
            # row (i, j) gets sum_l M[i, l] * z[idx[l, j]]
            ii, ll, jj = np.nonzero(np.broadcast_to(M[:, :, None] != 0, (r_out, M.shape[1], w)))
            keep = idx[ll, jj] >= 0
            ii, ll, jj = ii[keep], ll[keep], jj[keep]
            self.rows.append(row_ids[ii, jj])
            self.cols.append(idx[ll, jj])
            self.vals.append(M[ii, ll])
        self.rhs.append(np.asarray(rhs, dtype=float).reshape(-1))
        self.m += np.asarray(rhs).size

    def Aeq(self):
        if not self.rows:
            return sp.csc_matrix((self.m, self.n)), np.concatenate(self.rhs) if self.rhs else np.zeros(0)
        A = sp.csc_matrix(
            (np.concatenate(self.vals), (np.concatenate(self.rows), np.concatenate(self.cols))),
            shape=(self.m, self.n),
        )
        return A, np.concatenate(self.rhs)

    def add_quad(self, idx, M, scale):
        """Add ``sum_j scale[j] * z[idx[:, j]]' M z[idx[:, j]]`` to the objective (as 1/2 z'Pz)."""
        self.P_diag_blocks.append((idx, np.atleast_2d(M), np.asarray(scale, dtype=float)))

    def P(self):
        rows, cols, vals = [], [], []
        for idx, M, scale in self.P_diag_blocks:
            r, w = idx.shape
            for a in range(r):
                for b in range(r):
                    if M[a, b] == 0:
                        continue
                    rows.append(idx[a])
                    cols.append(idx[b])
                    vals.append(2.0 * M[a, b] * scale)
        if not rows:
            return sp.csc_matrix((self.n, self.n))
        return sp.csc_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                             shape=(self.n, self.n))


def _cone_rows(builder_n, idx_row, cols, norms, lam, mean_index, bound, hard):
    cones = []
    rand = cols != 0
    if bound is None:
        return cones
    if hard or not np.any(rand) or lam == 0.0:
        F = sp.csr_matrix((1, builder_n))
        g = np.zeros(1)
    else:
        r = int(rand.sum())
        F = sp.csr_matrix((lam * np.sqrt(norms[cols[rand]]), (np.arange(r), idx_row[rand])),
                          shape=(r, builder_n))
        g = np.zeros(r)
    if bound.ub is not None:
        c = np.zeros(builder_n)
        c[mean_index] = -1.0
        cones.append(SocConstraint(F, g, c, bound.ub))
    if bound.lb is not None:
        c = np.zeros(builder_n)
        c[mean_index] = 1.0
        cones.append(SocConstraint(F, g, c, -bound.lb))
    return cones


def _check_initial_bounds(x0: np.ndarray, norms, bounds, lam):
    for i, b in enumerate(bounds):
        if b is None:
            continue
        std = 0.0 if b.hard else float(np.sqrt(np.sum(norms[1:] * x0[i, 1:] ** 2)))
        m = x0[i, 0]
        if (b.ub is not None and m + lam * std > b.ub + 1e-12) or (
            b.lb is not None and m - lam * std < b.lb - 1e-12
        ):
            raise ValueError(
                f"chance constraint on state {i} is violated by the initial condition "
                f"(mean {m:.6g}, std {std:.6g}, lambda {lam:.6g})"
            )


def galerkin_transcribe(ocp: StochasticOcp) -> Transcription:
    """Build the deterministic conic program for ``ocp``."""
    sys_, cost, N = ocp.system, ocp.cost, ocp.N
    nx, nu = sys_.nx, sys_.nu
    space = build_joint_basis(ocp)
    norms = space.norms
    imap = _index_map(space, N, nx, nu)
    x0 = ocp.x0.embed(space).coeffs
    W = noise_coefficients(ocp.noise, space, list(range(N)))
    bld = _Builder(imap.n)
    const = 0.0

    # dynamics, one block of equalities per time step
    for k in range(N):
        cols_next = imap.x_cols[k + 1]
        ucols = imap.u_cols[k]
        # X(k) and U(k) are identically zero on the basis indices new at k+1
        pos = np.searchsorted(cols_next, ucols)
        rhs = sys_.E @ W[k][:, cols_next]
        terms = [(imap.x_index(k + 1), np.eye(nx))]
        xk_full = np.zeros((nx, len(cols_next)))
        if k == 0:
            xk_full[:, pos] = x0[:, ucols]
            rhs = rhs + sys_.A @ xk_full
        else:
            terms.append((_pad_index(imap.x_index(k), pos, len(cols_next)), -sys_.A))
        terms.append((_pad_index(imap.u_index(k), pos, len(cols_next)), -sys_.B))
        bld.add_eq(terms, rhs)

    # objective
    for k in range(N):
        ucols = imap.u_cols[k]
        u_scale = np.where(ucols == 0, 1.0, norms[ucols])
        bld.add_quad(imap.u_index(k), cost.Ru, u_scale)
        gam_scale = np.where(ucols == 0, 0.0, norms[ucols])
        bld.add_quad(imap.u_index(k), np.diag(cost.gamma_u), gam_scale)
        bld.q[imap.u_index(k)[:, 0]] += cost.ru
        if k == 0:
            const += _part_cost(x0, norms, cost.Qx, cost.qx, cost.gamma_x)
            continue
        xcols = imap.x_cols[k]
        x_scale = np.where(xcols == 0, 1.0, norms[xcols])
        bld.add_quad(imap.x_index(k), cost.Qx, x_scale)
        bld.add_quad(imap.x_index(k), np.diag(cost.gamma_x), np.where(xcols == 0, 0.0, norms[xcols]))
        bld.q[imap.x_index(k)[:, 0]] += cost.qx

    # chance constraints
    con = ocp.constraints
    lam_x, lam_u = lambda_of_epsilon(con.epsilon_x), lambda_of_epsilon(con.epsilon_u)
    sb, ib = con.states(nx), con.inputs(nu)
    _check_initial_bounds(x0, norms, sb, lam_x)
    cones = []
    for k in range(1, N + 1):
        idx, cols = imap.x_index(k), imap.x_cols[k]
        for i, b in enumerate(sb):
            if b is not None:
                cones += _cone_rows(imap.n, idx[i], cols, norms, lam_x, idx[i, 0], b, b.hard)
    for k in range(N):
        idx, cols = imap.u_index(k), imap.u_cols[k]
        for i, b in enumerate(ib):
            if b is not None:
                cones += _cone_rows(imap.n, idx[i], cols, norms, lam_u, idx[i, 0], b, b.hard)

    Aeq, beq = bld.Aeq()
    program = ConicProgram(bld.P(), bld.q, Aeq, beq, cones)
    return Transcription(program, imap, const, x0, W)


def _pad_index(idx, pos, width):
    """Scatter an index block into ``width`` columns; absent columns map to -1."""
    out = np.full((idx.shape[0], width), -1, dtype=int)
    out[:, pos] = idx
    return out


# -- solution containers ------------------------------------------------------


@dataclass(frozen=True)
class PceTrajectory:
    """PCE coefficients of an optimal state/input trajectory.

    ``X`` has shape ``(N+1, nx, dim)``, ``U`` ``(N, nu, dim)``; ``W`` holds
    the (known) noise coefficients ``(N, nw, dim)``.
    """

    space: GermSpace
    X: np.ndarray
    U: np.ndarray
    W: np.ndarray
    causality_mask: np.ndarray
    system: LinearStochasticSystem

    @property
    def N(self) -> int:
        return self.U.shape[0]

    def state(self, k: int) -> PceVector:
        return PceVector(self.X[k], self.space)

    def input(self, k: int) -> PceVector:
        return PceVector(self.U[k], self.space)

    def state_mean(self) -> np.ndarray:
        return self.X[:, :, 0].copy()

    def state_variance(self) -> np.ndarray:
        return (self.X[:, :, 1:] ** 2) @ self.space.norms[1:]

    def input_mean(self) -> np.ndarray:
        return self.U[:, :, 0].copy()

    def input_variance(self) -> np.ndarray:
        return (self.U[:, :, 1:] ** 2) @ self.space.norms[1:]

    def lumped_state_noise(self) -> np.ndarray | None:
        """Per-step lumped noise coefficients of ``X(k)``; None for non-Gaussian noise."""
        if not pce.noise_is_gaussian(self.space):
            return None
        return np.stack([pce.lump_noise(self.state(k), k) for k in range(self.N + 1)])

    def lumped_input_noise(self) -> np.ndarray | None:
        if not pce.noise_is_gaussian(self.space):
            return None
        return np.stack([pce.lump_noise(self.input(k), k) for k in range(self.N)])

    def causality_violation(self) -> float:
        """Largest magnitude on any coefficient the filtration forbids (exactly 0 by construction)."""
        mask = self.causality_mask
        bad_x = np.abs(self.X[:, :, :]) * (~mask)[:, None, :]
        bad_u = np.abs(self.U) * (~mask[: self.N])[:, None, :]
        return float(max(bad_x.max(initial=0.0), bad_u.max(initial=0.0)))


@dataclass(frozen=True)
class OcpResult:
    trajectory: PceTrajectory
    objective: float
    solution: Solution


def _unpack(tr: Transcription, z: np.ndarray, system) -> PceTrajectory:
    imap = tr.index
    N, dim = len(imap.u_cols), imap.space.dim
    X = np.zeros((N + 1, imap.nx, dim))
    U = np.zeros((N, imap.nu, dim))
    X[0] = tr.x0
    for k in range(1, N + 1):
        X[k][:, imap.x_cols[k]] = z[imap.x_index(k)]
    for k in range(N):
        U[k][:, imap.u_cols[k]] = z[imap.u_index(k)]
    return PceTrajectory(imap.space, X, U, tr.W, imap.causality_mask(), system)


def _run(cp: ConicProgram, settings: SolverSettings | None) -> Solution:
    if not cp.cones:
        return solve_eq_qp(cp.P, cp.q, cp.Aeq, cp.beq)
    return solve(cp, settings)


def solve_ocp(ocp: StochasticOcp, settings: SolverSettings | None = None) -> OcpResult:
    """Transcribe and solve; raises :class:`SolverError` unless optimal.

    Cone-free programs go through the direct KKT solve, everything else
    through ADMM.
    """
    tr = galerkin_transcribe(ocp)
    sol = _run(tr.program, settings)
    if sol.status is not Status.OPTIMAL:
        raise SolverError(f"solver finished with status {sol.status.value}: {sol.message}", sol)
    traj = _unpack(tr, sol.z, ocp.system)
    return OcpResult(traj, sol.objective + tr.constant, sol)


# -- optimal stochastic steady state ----------------------------------------------


@dataclass(frozen=True)
class SteadyStatePce:
    space: GermSpace
    Xbar: PceVector
    Ubar: PceVector
    Wbar: PceVector
    objective: float

    def stationarity_residual(self, system: LinearStochasticSystem) -> float:
        r = system.A @ self.Xbar.coeffs + system.B @ self.Ubar.coeffs + system.E @ self.Wbar.coeffs
        return float(np.max(np.abs(r - self.Xbar.coeffs), initial=0.0))


def steady_state(
    system: LinearStochasticSystem,
    cost: StageCost,
    constraints: ChanceConstraintSpec | None = None,
    noise: NoiseSpec | None = None,
    settings: SolverSettings | None = None,
) -> SteadyStatePce:
    """Minimize the stage cost over pairs with ``Xbar = A Xbar + B Ubar + E Wbar``.

    The basis carries one germ per noise channel (a single time step) and no
    initial-condition germs.
    """
    constraints = constraints or ChanceConstraintSpec()
    noise = noise or NoiseSpec()
    if noise.nw != system.nw:
        raise ValueError("noise spec does not match E")
    nx, nu = system.nx, system.nu
    space = GermSpace(tuple(noise.germ(c, None) for c in range(noise.nw)))
    dim, norms = space.dim, space.norms
    Wbar = noise_coefficients(noise, space, [None])[0]
    xi = np.arange(nx * dim).reshape(nx, dim)
    ui = nx * dim + np.arange(nu * dim).reshape(nu, dim)
    n = (nx + nu) * dim
    bld = _Builder(n)
    bld.add_eq([(xi, np.eye(nx) - system.A), (ui, -system.B)], system.E @ Wbar)
    cols = np.arange(dim)
    scale = np.where(cols == 0, 1.0, norms)
    vscale = np.where(cols == 0, 0.0, norms)
    bld.add_quad(xi, cost.Qx, scale)
    bld.add_quad(xi, np.diag(cost.gamma_x), vscale)
    bld.add_quad(ui, cost.Ru, scale)
    bld.add_quad(ui, np.diag(cost.gamma_u), vscale)
    bld.q[xi[:, 0]] += cost.qx
    bld.q[ui[:, 0]] += cost.ru
    lam_x, lam_u = lambda_of_epsilon(constraints.epsilon_x), lambda_of_epsilon(constraints.epsilon_u)
    cones = []
    for idx, bounds, lam in ((xi, constraints.states(nx), lam_x), (ui, constraints.inputs(nu), lam_u)):
        for i, b in enumerate(bounds):
            if b is not None:
                cones += _cone_rows(n, idx[i], cols, norms, lam, idx[i, 0], b, b.hard)
    Aeq, beq = bld.Aeq()
    sol = _run(ConicProgram(bld.P(), bld.q, Aeq, beq, cones), settings)
    if sol.status is not Status.OPTIMAL:
        raise SolverError(f"steady-state problem: {sol.status.value}: {sol.message}", sol)
    Xbar = PceVector(sol.z[xi], space)
    Ubar = PceVector(sol.z[ui], space)
    return SteadyStatePce(space, Xbar, Ubar, PceVector(Wbar, space), sol.objective)


# -- realizations ---------------------------------------------------------------


@dataclass(frozen=True)
class Realization:
    x: np.ndarray  # (N+1, nx)
    u: np.ndarray  # (N, nu)
    w: np.ndarray  # (N, nw)

    def recursion_residual(self, system: LinearStochasticSystem) -> float:
        pred = self.x[:-1] @ system.A.T + self.u @ system.B.T + self.w @ system.E.T
        return float(np.max(np.abs(pred - self.x[1:]), initial=0.0))


def realize_trajectory(traj: PceTrajectory, g: GermRealization) -> Realization:
    """Deterministic state/input/noise sequences at one germ draw."""
    phi = traj.space.basis_values(g.vector_for(traj.space))
    return Realization(traj.X @ phi, traj.U @ phi, traj.W @ phi)


def realize_many(traj: PceTrajectory, draws: np.ndarray) -> Realization:
    """Vectorized realizations; arrays gain a leading sample axis."""
    phi = traj.space.basis_values(draws)
    return Realization(
        np.einsum("knj,sj->skn", traj.X, phi),
        np.einsum("knj,sj->skn", traj.U, phi),
        np.einsum("knj,sj->skn", traj.W, phi),
    )
