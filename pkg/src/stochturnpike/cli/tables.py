"""Tabular views of solutions, shared by the subcommands and figure builders."""
from __future__ import annotations

import numpy as np

from .. import pce
from ..stoch_ocp import PceTrajectory, SteadyStatePce, realize_many
from .output import Table


def state_names(nx):
    return [f"x{i}" for i in range(nx)]


def input_names(nu):
    return [f"u{i}" for i in range(nu)]


def trajectory_table(traj: PceTrajectory, name: str = "trajectory") -> Table:
    """One row per (k, component): moments, lumped noise and initial-germ coefficients."""
    init = [(traj.space.index_of(g.id), g.id) for g in traj.space.components if not g.is_noise]
    t = Table(name, ["k", "component", "mean", "variance", "lumped_noise_coeff"] + [f"c[{gid}]" for _, gid in init])
    gaussian = pce.noise_is_gaussian(traj.space)
    xs, us = state_names(traj.X.shape[1]), input_names(traj.U.shape[1])
    xm, xv = traj.state_mean(), traj.state_variance()
    um, uv = traj.input_mean(), traj.input_variance()
    xl = traj.lumped_state_noise() if gaussian else None
    ul = traj.lumped_input_noise() if gaussian else None
    for k in range(traj.N + 1):
        for i, nm in enumerate(xs):
            lump = float(xl[k, i]) if xl is not None else float("nan")
            t.add(k, nm, xm[k, i], xv[k, i], lump, *(traj.X[k, i, j] for j, _ in init))
        if k == traj.N:
            continue
        for i, nm in enumerate(us):
            lump = float(ul[k, i]) if ul is not None else float("nan")
            t.add(k, nm, um[k, i], uv[k, i], lump, *(traj.U[k, i, j] for j, _ in init))
    return t


def realizations_table(traj: PceTrajectory, count: int, seed, name: str = "realizations") -> Table:
    t = Table(name, ["k", "sample_id", "component", "value"])
    real = realize_many(traj, pce.draw_germ_matrix(traj.space, seed, count))
    xs, us = state_names(traj.X.shape[1]), input_names(traj.U.shape[1])
    for k in range(traj.N + 1):
        for s in range(count):
            for i, nm in enumerate(xs):
                t.add(k, s, nm, real.x[s, k, i])
            if k < traj.N:
                for i, nm in enumerate(us):
                    t.add(k, s, nm, real.u[s, k, i])
    return t


def steady_table(ss: SteadyStatePce, name: str = "steady") -> Table:
    ids = ss.space.ids
    t = Table(name, ["component", "mean", "variance"] + [f"c[{g}]" for g in ids])
    for names, v in ((state_names(ss.Xbar.n), ss.Xbar), (input_names(ss.Ubar.n), ss.Ubar)):
        m, var = pce.mean(v), pce.variance(v)
        for i, nm in enumerate(names):
            t.add(nm, m[i], var[i], *v.coeffs[i, 1:])
    return t
