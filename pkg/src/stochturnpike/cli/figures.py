"""Data series (and courtesy SVG renderings) behind the figures of the study."""
from __future__ import annotations

import numpy as np

from .. import pce, turnpike
from ..stoch_ocp import realize_many, solve_ocp
from .commands import _steady, fixed_noise_table, plot_fixed_noise
from .config import ExperimentConfig, load_preset
from .output import Table

FIGURES = {
    "fig1": ("motivating", "deterministic sweep"),
    "fig2": ("example1", "sample realizations per horizon"),
    "fig3": ("example1", "PCE coefficient trajectories"),
    "fig4": ("example1", "stationary pdf vs histogram"),
    "fig5": ("example1", "distribution evolution"),
    "fig6": ("example2", "mean/variance and samples"),
    "fig7": ("example2", "distribution evolution"),
    "fig8": ("example2", "fixed disturbance realization"),
    "fig9": ("example3", "mean/variance and samples"),
    "fig10": ("example3", "distribution evolution"),
}


def _seed(seed, *extra):
    return np.random.SeedSequence([seed, *extra])


def _sweep(cfg):
    hs = cfg.problem.horizons
    sweep = turnpike.horizon_sweep(cfg.ocp(hs[0]), hs, cfg.solver_settings())
    bad = sweep.failures()
    if bad:
        from ..stoch_ocp import SolverError

        raise SolverError(f"horizon {bad[0].N}: {bad[0].message}")
    return sweep


def _deterministic_sweep(cfg, seed, samples):
    sweep = _sweep(cfg)
    t = Table("fig1", ["N", "k", "x", "u"])
    for N, run in sweep.runs.items():
        tr = run.trajectory
        for k in range(N + 1):
            t.add(N, k, tr.X[k, 0, 0], tr.U[k, 0, 0] if k < N else None)

    def draw(fig):
        ax1, ax2 = fig.add_subplot(211), fig.add_subplot(212)
        for N, run in sweep.runs.items():
            ax1.plot(run.trajectory.X[:, 0, 0], marker=".", lw=0.8)
            ax2.step(np.arange(N), run.trajectory.U[:, 0, 0], where="post", lw=0.8)
        ax1.set_ylabel("x")
        ax2.set_ylabel("u")
        ax2.set_xlabel("k")

    return [t], draw


def _samples_table(name, sweep, count, seed):
    first = next(iter(sweep.runs.values())).trajectory
    nx, nu = first.X.shape[1], first.U.shape[1]
    t = Table(name, ["N", "sample_id", "k"] + [f"x{i}" for i in range(nx)] + [f"u{i}" for i in range(nu)])
    paths = {}
    for N, run in sweep.runs.items():
        tr = run.trajectory
        real = realize_many(tr, pce.draw_germ_matrix(tr.space, _seed(seed, N), count))
        paths[N] = real
        for s in range(count):
            for k in range(N + 1):
                u = list(real.u[s, k]) if k < N else [None] * nu
                t.add(N, s, k, *real.x[s, k], *u)
    return t, paths


def _fig2(cfg, seed, samples):
    sweep = _sweep(cfg)
    t, paths = _samples_table("fig2", sweep, samples, seed)

    def draw(fig):
        ax1, ax2 = fig.add_subplot(211), fig.add_subplot(212)
        for N, real in paths.items():
            for s in range(real.x.shape[0]):
                ax1.plot(real.x[s, :, 0], lw=0.4)
                ax2.step(np.arange(N), real.u[s, :, 0], where="post", lw=0.4)
        ax1.set_ylabel("x")
        ax2.set_ylabel("u")

    return [t], draw


def _fig3(cfg, seed, samples):
    sweep = _sweep(cfg)
    t = Table("fig3", ["N", "k", "variable", "mean", "init_coeff", "lumped_noise_coeff"])
    for N, run in sweep.runs.items():
        tr = run.trajectory
        init = tr.space.init_indices()
        j = int(init[0]) if init.size else None
        lx, lu = tr.lumped_state_noise(), tr.lumped_input_noise()
        for k in range(N + 1):
            t.add(N, k, "x", tr.X[k, 0, 0], tr.X[k, 0, j] if j else 0.0, lx[k, 0])
            if k < N:
                t.add(N, k, "u", tr.U[k, 0, 0], tr.U[k, 0, j] if j else 0.0, lu[k, 0])

    def draw(fig):
        axes = [fig.add_subplot(3, 2, i + 1) for i in range(6)]
        for N, run in sweep.runs.items():
            tr = run.trajectory
            j = int(tr.space.init_indices()[0])
            axes[0].plot(tr.X[:, 0, 0], lw=0.8)
            axes[2].plot(tr.X[:, 0, j], lw=0.8)
            axes[4].plot(tr.lumped_state_noise()[:, 0], lw=0.8)
            axes[1].plot(tr.U[:, 0, 0], lw=0.8)
            axes[3].plot(tr.U[:, 0, j], lw=0.8)
            axes[5].plot(tr.lumped_input_noise()[:, 0], lw=0.8)
        for ax, lab in zip(axes, ["x_0", "u_0", "x_1", "u_1", "x_sum^w", "u_sum^w"]):
            ax.set_title(lab, fontsize=8)

    return [t], draw


def _fig4(cfg, seed, samples):
    a = cfg.analysis
    res = solve_ocp(cfg.ocp(a.histogram_horizon), cfg.solver_settings())
    ss = _steady(cfg)
    comp = turnpike.compare_histogram(res.trajectory, a.stationary_time, a.component, samples,
                                      _seed(seed, a.stationary_time), ss, a.bins, a.grid_size)
    exact = turnpike.pce_pdf(res.trajectory.state(a.stationary_time), a.component, comp.grid)
    pdf = Table("fig4_pdf", ["x", "stationary_pdf", "pce_pdf"])
    for x, p, q in zip(comp.grid, comp.pdf, exact):
        pdf.add(x, p, q)
    hist = Table("fig4_hist", ["bin_left", "bin_right", "count"])
    for lo, hi, c in zip(comp.bin_edges[:-1], comp.bin_edges[1:], comp.histogram):
        hist.add(lo, hi, int(c))
    summ = Table("fig4_summary", ["N", "k", "sample_count", "ks_stationary", "ks_pce"])
    summ.add(a.histogram_horizon, a.stationary_time, samples, comp.ks_statistic, comp.pce_ks_statistic)

    def draw(fig):
        ax = fig.add_subplot(111)
        ax.stairs(comp.histogram / (comp.sample_count * np.diff(comp.bin_edges)), comp.bin_edges,
                  fill=True, alpha=0.4, label="histogram")
        ax.plot(comp.grid, comp.pdf, label="steady-state pdf")
        ax.plot(comp.grid, exact, ls="--", label=f"PCE pdf, k={a.stationary_time}")
        ax.legend()

    return [pdf, hist, summ], draw


def _distribution_evolution(name):
    def build(cfg, seed, samples):
        a = cfg.analysis
        res = solve_ocp(cfg.ocp(a.histogram_horizon), cfg.solver_settings())
        tr = res.trajectory
        pdf = Table(f"{name}_pdf", ["k", "x", "pdf"])
        hist = Table(f"{name}_hist", ["k", "bin_left", "bin_right", "count"])
        summ = Table(f"{name}_summary", ["k", "mean", "variance", "ks_pce"])
        comps = {}
        for k in a.histogram_times:
            if k > tr.N:
                continue
            c = turnpike.compare_histogram(tr, k, a.component, samples, _seed(seed, k), None,
                                           a.bins, a.grid_size)
            comps[k] = c
            for x, p in zip(c.grid, c.pdf):
                pdf.add(k, x, p)
            for lo, hi, n in zip(c.bin_edges[:-1], c.bin_edges[1:], c.histogram):
                hist.add(k, lo, hi, int(n))
            v = tr.state(k)
            summ.add(k, pce.mean(v)[a.component], pce.variance(v)[a.component], c.pce_ks_statistic)

        def draw(fig):
            n = len(comps)
            for i, (k, c) in enumerate(comps.items()):
                ax = fig.add_subplot(1, n, i + 1)
                ax.stairs(c.histogram / (c.sample_count * np.diff(c.bin_edges)), c.bin_edges,
                          fill=True, alpha=0.4, orientation="horizontal")
                ax.plot(c.pdf, c.grid, lw=0.8)
                ax.set_title(f"k={k}", fontsize=8)

        return [pdf, hist, summ], draw

    return build


def _moments(name):
    def build(cfg, seed, samples):
        sweep = _sweep(cfg)
        t = Table(name, ["N", "k", "variable", "mean", "variance"])
        for N, run in sweep.runs.items():
            tr = run.trajectory
            xm, xv, um, uv = tr.state_mean(), tr.state_variance(), tr.input_mean(), tr.input_variance()
            for k in range(N + 1):
                for i in range(xm.shape[1]):
                    t.add(N, k, f"x{i}", xm[k, i], xv[k, i])
                if k < N:
                    for i in range(um.shape[1]):
                        t.add(N, k, f"u{i}", um[k, i], uv[k, i])
        st, _ = _samples_table(f"{name}_samples", sweep, min(samples, 16), seed)

        def draw(fig):
            nx = sweep.runs[sweep.horizons[0]].trajectory.X.shape[1]
            rows = nx + 1
            axes = [fig.add_subplot(rows, 2, i + 1) for i in range(2 * rows)]
            for run in sweep.runs.values():
                tr = run.trajectory
                for i in range(nx):
                    axes[2 * i].plot(tr.state_mean()[:, i], lw=0.8)
                    axes[2 * i + 1].plot(tr.state_variance()[:, i], lw=0.8)
                axes[2 * nx].plot(tr.input_mean()[:, 0], lw=0.8)
                axes[2 * nx + 1].plot(tr.input_variance()[:, 0], lw=0.8)

        return [t, st], draw

    return build


def _fig8(cfg, seed, samples):
    hs = cfg.analysis.fixed_noise_horizons
    template = cfg.ocp(hs[0])
    master, draws = turnpike.fixed_noise_draws(template, max(hs), cfg.analysis.x0_draws, seed)
    runs = turnpike.fixed_noise_experiment(template, hs, draws, master, cfg.solver_settings())
    t = fixed_noise_table(runs, "fig8")
    return [t], lambda fig: plot_fixed_noise(fig, runs)


BUILDERS = {
    "fig1": _deterministic_sweep,
    "fig2": _fig2,
    "fig3": _fig3,
    "fig4": _fig4,
    "fig5": _distribution_evolution("fig5"),
    "fig6": _moments("fig6"),
    "fig7": _distribution_evolution("fig7"),
    "fig8": _fig8,
    "fig9": _moments("fig9"),
    "fig10": _distribution_evolution("fig10"),
}

# figures whose --samples default is the histogram sample count
_HISTOGRAM_FIGS = {"fig4", "fig5", "fig7", "fig10"}


def figure_config(figure_id: str) -> ExperimentConfig:
    if figure_id not in FIGURES:
        raise KeyError(figure_id)
    return load_preset(FIGURES[figure_id][0])


def build_figure(figure_id: str, cfg: ExperimentConfig, seed: int, samples: int | None):
    if samples is None:
        samples = cfg.analysis.histogram_samples if figure_id in _HISTOGRAM_FIGS else cfg.analysis.samples
    return BUILDERS[figure_id](cfg, seed, samples)


def cmd_reproduce(figure_id: str, cfg: ExperimentConfig | None, out, seed: int,
                  samples: int | None, formats) -> int:
    """Write the data tables (and optionally the SVG) for one figure into ``out``."""
    from .commands import Timer
    from .output import OutputDir, render_svg

    if cfg is None:
        cfg = figure_config(figure_id)
    timer = Timer()
    od = OutputDir(out)
    with timer("compute"):
        tables, draw = build_figure(figure_id, cfg, seed, samples)
    for t in tables:
        od.write_table(t)
    if "svg" in formats:
        with timer("render"):
            render_svg(od.root / f"{figure_id}.svg", draw)
    od.write_manifest(cfg, seed, timer.timings, {"figure": figure_id,
                                                 "description": FIGURES[figure_id][1]})
    return 0
