"""Turnpike diagnostics for PCE solutions of stochastic LQ problems.

Horizon sweeps, moment-space distances to the optimal stochastic steady
state, the fixed-disturbance realization experiment, and comparisons of
sampled histograms against PCE densities.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import stats

from . import pce
from .conic_solver import SolverSettings
from .pce import GermFamily, GermMismatchError, GermRealization, PceVector
from .stoch_ocp import (
    PceTrajectory,
    Realization,
    SolverError,
    SteadyStatePce,
    StochasticOcp,
    build_joint_basis,
    realize_many,
    realize_trajectory,
    solve_ocp,
)

log = logging.getLogger(__name__)

DEFAULT_ETA = 0.05
DEFAULT_GRID_SIZE = 2**12


@dataclass(frozen=True)
class HorizonRun:
    N: int
    trajectory: PceTrajectory | None
    objective: float
    status: str
    message: str = ""

    @property
    def ok(self) -> bool:
        return self.trajectory is not None

    @property
    def mean(self) -> np.ndarray:
        return self.trajectory.state_mean()

    @property
    def variance(self) -> np.ndarray:
        return self.trajectory.state_variance()

    @property
    def input_mean(self) -> np.ndarray:
        return self.trajectory.input_mean()

    @property
    def input_variance(self) -> np.ndarray:
        return self.trajectory.input_variance()

    @property
    def lumped(self) -> np.ndarray | None:
        return self.trajectory.lumped_state_noise()


@dataclass(frozen=True)
class SweepResult:
    runs: dict[int, HorizonRun]

    def __post_init__(self):
        hs = list(self.runs)
        if any(b <= a for a, b in zip(hs, hs[1:])):
            raise ValueError("horizons must be strictly increasing")

    @property
    def horizons(self) -> list[int]:
        return list(self.runs)

    def __getitem__(self, N: int) -> HorizonRun:
        return self.runs[N]

    def failures(self) -> list[HorizonRun]:
        return [r for r in self.runs.values() if not r.ok]


def horizon_sweep(
    template: StochasticOcp,
    horizons: Sequence[int],
    settings: SolverSettings | None = None,
    max_workers: int | None = None,
) -> SweepResult:
    """Solve ``template`` independently for every horizon.

    Solver failures are recorded per horizon and do not abort the sweep.
    """
    horizons = [int(h) for h in horizons]
    if not horizons:
        raise ValueError("horizon list is empty")
    if any(b <= a for a, b in zip(horizons, horizons[1:])):
        raise ValueError("horizons must be strictly increasing")

    def one(N):
        try:
            res = solve_ocp(template.with_horizon(N), settings)
        except SolverError as exc:
            log.warning("horizon %d failed: %s", N, exc)
            return HorizonRun(N, None, float("nan"), exc.solution.status.value if exc.solution else "error", str(exc))
        return HorizonRun(N, res.trajectory, res.objective, res.solution.status.value)

    if max_workers and max_workers > 1:
        with ThreadPoolExecutor(max_workers) as pool:
            runs = list(pool.map(one, horizons))
    else:
        runs = [one(N) for N in horizons]
    return SweepResult({r.N: r for r in runs})


# -- distances to the steady state --------------------------------------------


@dataclass(frozen=True)
class HorizonMetrics:
    N: int
    distance: np.ndarray
    entry_time: int | None
    exit_time: int | None
    mid_distance: float

    @property
    def plateau(self) -> int | None:
        if self.entry_time is None:
            return None
        return self.exit_time - self.entry_time


@dataclass(frozen=True)
class TurnpikeMetrics:
    eta: float
    horizons: dict[int, HorizonMetrics]

    def __getitem__(self, N: int) -> HorizonMetrics:
        return self.horizons[N]


def state_distance(mean, variance, ss: SteadyStatePce, lumped=None, lumped_weight: float = 0.0):
    """``||mean - E[Xbar]|| + ||sqrt(var) - sqrt(V[Xbar])||`` per time step.

    ``mean`` and ``variance`` have shape ``(T, nx)``. A positive
    ``lumped_weight`` adds the distance between lumped noise coefficients.
    """
    m_ss, v_ss = pce.mean(ss.Xbar), pce.variance(ss.Xbar)
    mean, variance = np.atleast_2d(mean), np.atleast_2d(variance)
    if mean.shape[-1] != m_ss.size:
        raise ValueError("trajectory and steady state have different state dimensions")
    d = np.linalg.norm(mean - m_ss, axis=-1)
    d += np.linalg.norm(np.sqrt(np.maximum(variance, 0.0)) - np.sqrt(v_ss), axis=-1)
    if lumped_weight and lumped is not None:
        d += lumped_weight * np.linalg.norm(lumped - pce.lump_noise(ss.Xbar), axis=-1)
    return d


def _entry_exit(d, eta):
    hits = np.flatnonzero(d <= eta)
    if hits.size == 0:
        return None, None
    return int(hits[0]), int(hits[-1])


def distance_to_steady(sweep: SweepResult, ss: SteadyStatePce, eta: float = DEFAULT_ETA,
                       lumped_weight: float = 0.0) -> TurnpikeMetrics:
    out = {}
    for N, run in sweep.runs.items():
        if not run.ok:
            continue
        lumped = run.lumped if lumped_weight else None
        d = state_distance(run.mean, run.variance, ss, lumped, lumped_weight)
        entry, exit_ = _entry_exit(d, eta)
        out[N] = HorizonMetrics(N, d, entry, exit_, float(d[N // 2]))
    return TurnpikeMetrics(eta, out)


# -- fixed disturbance realization ------------------------------------------------


@dataclass(frozen=True)
class FixedNoiseRun:
    N: int
    draw: int
    realization: Realization


def fixed_noise_experiment(
    template: StochasticOcp,
    horizons: Sequence[int],
    x0_draws: Sequence[GermRealization],
    master_noise: GermRealization,
    settings: SolverSettings | None = None,
) -> list[FixedNoiseRun]:
    """Simulate every (horizon, initial draw) pair under one shared disturbance path.

    ``master_noise`` supplies values for the noise germs of the longest
    horizon; shorter horizons use its prefix.
    """
    horizons = [int(h) for h in horizons]
    if not horizons:
        raise ValueError("horizon list is empty")
    runs = []
    for N in horizons:
        ocp = template.with_horizon(N)
        space = build_joint_basis(ocp)
        missing = [c.id for c in space.components if c.is_noise and c.id not in master_noise.values]
        if missing:
            raise GermMismatchError(
                f"master noise realization does not cover horizon {N} (missing {missing[0]!r})"
            )
        traj = solve_ocp(ocp, settings).trajectory
        for i, g0 in enumerate(x0_draws):
            runs.append(FixedNoiseRun(N, i, realize_trajectory(traj, master_noise.merged(g0))))
    return runs


def fixed_noise_draws(template: StochasticOcp, longest: int, count: int, seed: int):
    """Master disturbance path for ``longest`` steps and ``count`` initial draws.

    Both come from independent child streams of ``SeedSequence(seed)``.
    """
    noise_seq, x0_seq = np.random.SeedSequence(seed).spawn(2)
    space = build_joint_basis(template.with_horizon(longest))
    noise_space = pce.GermSpace(tuple(c for c in space.components if c.is_noise))
    init_space = template.x0.space
    master = (pce.draw_germs(noise_space, noise_seq, 1)[0] if noise_space.components
              else GermRealization({}))
    draws = (pce.draw_germs(init_space, x0_seq, count) if init_space.components
             else [GermRealization({}) for _ in range(count)])
    return master, draws


def pairwise_spread(runs: Sequence[FixedNoiseRun], window: range) -> np.ndarray:
    """Largest pairwise state difference per component over ``window``."""
    paths = np.stack([r.realization.x[list(window)] for r in runs])  # (R, T, nx)
    spread = paths.max(axis=0) - paths.min(axis=0)
    return spread.max(axis=0)


# -- densities and histograms -------------------------------------------------------


@dataclass(frozen=True)
class DistributionComparison:
    grid: np.ndarray
    pdf: np.ndarray
    histogram: np.ndarray | None = None
    bin_edges: np.ndarray | None = None
    ks_statistic: float | None = None
    sample_count: int = 0
    pce_ks_statistic: float | None = None
    samples: np.ndarray | None = field(default=None, repr=False)


NEGLIGIBLE_FRACTION = 0.05


def _contributions(coeffs_row, space):
    """Split an affine germ combination into (Gaussian std, uniform widths, narrowest).

    Uniform terms whose std is below ``NEGLIGIBLE_FRACTION`` of the total std are
    moment-matched into the Gaussian part: replacing a uniform of std ``s`` by a
    normal changes the density by ``O((s / sigma)**4)``, ~1e-6 at the cut. The
    returned ``narrowest`` is the smallest non-negligible contribution, which is
    what the grid resolution has to resolve.
    """
    gauss_var, widths = 0.0, []
    for j, c in enumerate(space.components, start=1):
        a = float(coeffs_row[j])
        if a == 0.0:
            continue
        if c.family is GermFamily.GAUSSIAN:
            gauss_var += a * a
        else:
            widths.append(abs(a))
    total_std = float(np.sqrt(gauss_var + sum(w * w for w in widths) / 12.0))
    cut = NEGLIGIBLE_FRACTION * total_std
    keep = [w for w in widths if w / np.sqrt(12.0) >= cut]
    absorbed = sum(w * w for w in widths if w / np.sqrt(12.0) < cut) / 12.0
    sg = float(np.sqrt(gauss_var + absorbed))
    spreads = [w / np.sqrt(12.0) for w in keep]
    if gauss_var > 0 and np.sqrt(gauss_var) >= cut:
        spreads.append(sg)
    narrowest = min(spreads) if spreads else sg
    return sg, keep, narrowest


def _uniform_spacing(grid):
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2:
        raise ValueError("grid needs at least two points")
    h = np.diff(grid)
    if np.any(h <= 0) or not np.allclose(h, h[0], rtol=1e-6, atol=0):
        raise ValueError("grid must be uniformly spaced and increasing")
    return grid, float(h[0])


def _box_masses(width, h):
    """Cell masses of a centered uniform law on cells ``[jh - h/2, jh + h/2]``."""
    half = 0.5 * width
    J = int(np.ceil(half / h + 0.5))
    j = np.arange(-J, J + 1)
    lo = np.maximum(j * h - 0.5 * h, -half)
    hi = np.minimum(j * h + 0.5 * h, half)
    return np.maximum(hi - lo, 0.0) / width


def _gauss_masses(std, h, reach=10.0):
    J = int(np.ceil(reach * std / h)) + 1
    j = np.arange(-J, J + 1)
    cdf = stats.norm.cdf((j[:, None] * h + np.array([-0.5, 0.5]) * h) / std)
    return cdf[:, 1] - cdf[:, 0]


def pce_pdf(v: PceVector, component: int, grid) -> np.ndarray:
    """Density of one component of an affine PCE vector evaluated on ``grid``.

    Gaussian germs merge into one normal; uniform germs are convolved
    numerically on the grid spacing. Single-germ cases use closed forms.
    """
    grid, h = _uniform_spacing(grid)
    row = v.coeffs[component]
    mu = float(row[0])
    sg, widths, narrowest = _contributions(row, v.space)
    if sg == 0.0 and not widths:
        raise ValueError("component is deterministic; it has no density")
    if h > narrowest / 10.0:
        raise ValueError(
            f"grid spacing {h:.3g} is coarser than a tenth of the narrowest germ spread {narrowest:.3g}"
        )
    x = grid - mu
    if not widths:
        return stats.norm.pdf(x, scale=sg)
    if len(widths) == 1:
        w = widths[0]
        if sg == 0.0:
            return np.where(np.abs(x) <= 0.5 * w, 1.0 / w, 0.0)
        return (stats.norm.cdf((x + 0.5 * w) / sg) - stats.norm.cdf((x - 0.5 * w) / sg)) / w
    mass = np.array([1.0])
    for w in widths:
        mass = np.convolve(mass, _box_masses(w, h))
    if sg > 0:
        mass = np.convolve(mass, _gauss_masses(sg, h))
    J = (mass.size - 1) // 2
    offsets = np.arange(-J, J + 1) * h
    return np.interp(x, offsets, mass / h, left=0.0, right=0.0)


def pce_cdf(v: PceVector, component: int):
    """Callable CDF of one component (closed form for the Gaussian-only case)."""
    row = v.coeffs[component]
    mu = float(row[0])
    sg, widths, narrowest = _contributions(row, v.space)
    if not widths:
        if sg == 0.0:
            return lambda t: (np.asarray(t) >= mu).astype(float)
        return lambda t: stats.norm.cdf(np.asarray(t, dtype=float), loc=mu, scale=sg)
    half = 0.5 * sum(widths)
    span = half + 10.0 * sg
    n = int(min(2**18, max(2**14, np.ceil(2 * span / (narrowest / 20.0)))))
    fine = np.linspace(mu - span, mu + span, n)
    dens = pce_pdf(v, component, fine)
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(fine))])
    cum /= cum[-1]
    return lambda t: np.interp(np.asarray(t, dtype=float), fine, cum, left=0.0, right=1.0)


def default_grid(v: PceVector, component: int, size: int = DEFAULT_GRID_SIZE, width: float = 6.0):
    m = float(pce.mean(v)[component])
    s = float(np.sqrt(pce.variance(v)[component]))
    _, widths, _ = _contributions(v.coeffs[component], v.space)
    reach = max(width * s, 0.5 * sum(widths) + 1e-12)
    return np.linspace(m - reach, m + reach, size)


def stationary_pdf(ss: SteadyStatePce, component: int, grid=None) -> DistributionComparison:
    """Density of component ``component`` of the steady-state random vector."""
    if grid is None:
        grid = default_grid(ss.Xbar, component)
    grid = np.asarray(grid, dtype=float)
    return DistributionComparison(grid, pce_pdf(ss.Xbar, component, grid))


def compare_histogram(
    traj: PceTrajectory,
    k: int,
    component: int,
    sample_count: int,
    seed: int,
    ss: SteadyStatePce | None = None,
    bins: int = 50,
    grid_size: int = DEFAULT_GRID_SIZE,
) -> DistributionComparison:
    """Histogram of sampled ``X(k)[component]`` against the stationary density.

    ``ks_statistic`` compares the samples with the steady-state law (when
    ``ss`` is given); ``pce_ks_statistic`` with the exact PCE law of ``X(k)``.
    """
    if not 0 <= k <= traj.N:
        raise ValueError(f"time {k} outside [0, {traj.N}]")
    draws = pce.draw_germ_matrix(traj.space, seed, sample_count)
    samples = pce.sample_many(traj.state(k), draws)[:, component]
    exact = traj.state(k)
    ref = ss.Xbar if ss is not None else exact
    grid = default_grid(ref, component, grid_size)
    pdf = pce_pdf(ref, component, grid)
    lo = min(grid[0], samples.min())
    hi = max(grid[-1], samples.max())
    counts, edges = np.histogram(samples, bins=bins, range=(lo, hi))
    ks = None
    if ss is not None:
        ks = float(stats.kstest(samples, pce_cdf(ss.Xbar, component)).statistic)
    pce_ks = float(stats.kstest(samples, pce_cdf(exact, component)).statistic)
    return DistributionComparison(grid, pdf, counts, edges, ks, sample_count, pce_ks, samples)


def monte_carlo_moments(traj: PceTrajectory, sample_count: int, seed: int):
    """Sample mean, variance and standard errors of every ``X(k)`` component."""
    real = realize_many(traj, pce.draw_germ_matrix(traj.space, seed, sample_count))
    x = real.x
    m = x.mean(axis=0)
    v = x.var(axis=0, ddof=1)
    se_m = np.sqrt(v / sample_count)
    # standard error of the sample variance: sqrt((mu4 - sigma^4 (n-3)/(n-1)) / n)
    mu4 = ((x - m) ** 4).mean(axis=0)
    se_v = np.sqrt(np.maximum(mu4 - v**2 * (sample_count - 3) / (sample_count - 1), 0.0) / sample_count)
    return m, v, se_m, se_v
