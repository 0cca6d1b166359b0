"""Implementation of the CLI subcommands."""
from __future__ import annotations

import time
from pathlib import Path

import numpy as np

from .. import turnpike
from ..stoch_ocp import SolverError, solve_ocp, steady_state
from .config import ConfigError, ExperimentConfig
from .output import OutputDir, Table, render_svg
from .tables import realizations_table, state_names, steady_table, trajectory_table


class Timer:
    def __init__(self):
        self.timings = {}

    def __call__(self, key):
        timer = self

        class _Ctx:
            def __enter__(self):
                self.t0 = time.perf_counter()

            def __exit__(self, *exc):
                timer.timings[key] = timer.timings.get(key, 0.0) + time.perf_counter() - self.t0

        return _Ctx()


def _svg_enabled(formats) -> bool:
    return "svg" in formats


def _steady(cfg: ExperimentConfig):
    return steady_state(cfg.system(), cfg.stage_cost(), cfg.chance_constraints(), cfg.noise_spec(),
                        cfg.solver_settings())


def cmd_solve(cfg: ExperimentConfig, out: Path, seed: int, samples: int, formats) -> int:
    timer = Timer()
    N = cfg.full_horizon()
    od = OutputDir(out)
    with timer("solve"):
        res = solve_ocp(cfg.ocp(N), cfg.solver_settings())
    traj = res.trajectory
    with timer("write"):
        tt = trajectory_table(traj)
        od.write_table(tt)
        od.write_table(realizations_table(traj, samples, seed))
    if _svg_enabled(formats):
        def draw(fig):
            ax = fig.add_subplot(111)
            k = np.arange(N + 1)
            for i, nm in enumerate(state_names(traj.X.shape[1])):
                m, s = traj.state_mean()[:, i], np.sqrt(traj.state_variance()[:, i])
                ax.plot(k, m, label=f"E[{nm}]")
                ax.fill_between(k, m - s, m + s, alpha=0.2)
            ax.set_xlabel("k")
            ax.legend()
        render_svg(od.root / "trajectory.svg", draw)
    od.write_manifest(cfg, seed, timer.timings, {"horizon": N, "objective": res.objective,
                                                 "solver_iterations": res.solution.iterations})
    return 0


def cmd_sweep(cfg: ExperimentConfig, out: Path, seed: int, samples: int, formats) -> int:
    horizons = cfg.problem.horizons
    if not horizons:
        raise ConfigError("problem.horizons: empty horizon list")
    timer = Timer()
    od = OutputDir(out)
    with timer("sweep"):
        sweep = turnpike.horizon_sweep(cfg.ocp(horizons[0]), horizons, cfg.solver_settings())
    with timer("steady"):
        ss = _steady(cfg)
    metrics = turnpike.distance_to_steady(sweep, ss, cfg.analysis.eta)
    mt = Table("metrics", ["N", "status", "objective", "entry_time", "exit_time", "mid_distance"])
    for N, run in sweep.runs.items():
        if run.ok:
            od.write_table(trajectory_table(run.trajectory, f"trajectory_N{N:03d}"))
            m = metrics[N]
            mt.add(N, run.status, run.objective, m.entry_time, m.exit_time, m.mid_distance)
        else:
            mt.add(N, run.status, None, None, None, None)
    od.write_table(mt)
    if _svg_enabled(formats):
        def draw(fig):
            ax = fig.add_subplot(111)
            for N, run in sweep.runs.items():
                if run.ok:
                    ax.plot(np.arange(N + 1), metrics[N].distance, label=f"N={N}")
            ax.axhline(cfg.analysis.eta, color="k", lw=0.5)
            ax.set_xlabel("k")
            ax.set_ylabel("distance to steady state")
            ax.legend(fontsize=7)
        render_svg(od.root / "metrics.svg", draw)
    od.write_manifest(cfg, seed, timer.timings, {"horizons": horizons})
    return 1 if sweep.failures() else 0


def cmd_steady(cfg: ExperimentConfig, out: Path, seed: int, samples: int, formats) -> int:
    timer = Timer()
    od = OutputDir(out)
    with timer("steady"):
        ss = _steady(cfg)
    od.write_table(steady_table(ss))
    od.write_manifest(cfg, seed, timer.timings, {"objective": ss.objective})
    return 0


def cmd_fixed_noise(cfg: ExperimentConfig, out: Path, seed: int, samples: int, formats) -> int:
    horizons = cfg.analysis.fixed_noise_horizons or cfg.problem.horizons
    if not horizons:
        raise ConfigError("analysis.fixed_noise_horizons: empty horizon list")
    timer = Timer()
    od = OutputDir(out)
    template = cfg.ocp(horizons[0])
    with timer("solve"):
        master, draws = turnpike.fixed_noise_draws(template, max(horizons), cfg.analysis.x0_draws, seed)
        runs = turnpike.fixed_noise_experiment(template, horizons, draws, master, cfg.solver_settings())
    t = fixed_noise_table(runs)
    od.write_table(t)
    if _svg_enabled(formats):
        render_svg(od.root / "fixed_noise.svg", lambda fig: plot_fixed_noise(fig, runs))
    od.write_manifest(cfg, seed, timer.timings, {"horizons": horizons})
    return 0


def fixed_noise_table(runs, name="fixed_noise") -> Table:
    nx = runs[0].realization.x.shape[1]
    nu = runs[0].realization.u.shape[1]
    t = Table(name, ["N", "draw_id", "k"] + state_names(nx) + [f"u{i}" for i in range(nu)])
    for r in runs:
        x, u = r.realization.x, r.realization.u
        for k in range(r.N + 1):
            uk = list(u[k]) if k < r.N else [None] * nu
            t.add(r.N, r.draw, k, *x[k], *uk)
    return t


def plot_fixed_noise(fig, runs):
    nx = runs[0].realization.x.shape[1]
    axes = [fig.add_subplot(nx + 1, 1, i + 1) for i in range(nx + 1)]
    for r in runs:
        for i in range(nx):
            axes[i].plot(r.realization.x[:, i], lw=0.8)
        axes[-1].step(np.arange(r.N), r.realization.u[:, 0], lw=0.8, where="post")
    for i in range(nx):
        axes[i].set_ylabel(f"x{i}")
    axes[-1].set_ylabel("u0")
    axes[-1].set_xlabel("k")


COMMANDS = {
    "solve": cmd_solve,
    "sweep": cmd_sweep,
    "steady": cmd_steady,
    "fixed-noise": cmd_fixed_noise,
}

__all__ = ["COMMANDS", "SolverError", "cmd_solve", "cmd_sweep", "cmd_steady", "cmd_fixed_noise"]
