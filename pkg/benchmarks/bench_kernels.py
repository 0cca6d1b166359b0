"""Compare the compiled and numpy cone kernels, alone and inside full solves.

Run ``python3 benchmarks/bench_kernels.py``. Timings are the best of
``--repeat`` runs; both backends get identical inputs, and the script checks
that they also give identical outputs.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from stochturnpike.cli.config import load_preset
from stochturnpike.conic_solver import kernels
from stochturnpike.stoch_ocp import solve_ocp


def _best(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _cone_case(n_blocks, block, m_eq, rng):
    sizes = np.full(n_blocks, block, dtype=np.intp)
    starts = m_eq + np.arange(n_blocks, dtype=np.intp) * block
    m = m_eq + n_blocks * block
    arrays = dict(vt=rng.normal(size=m), v=rng.normal(size=m), y=rng.normal(size=m),
                  b=rng.normal(size=m), rho=rng.uniform(0.1, 1.0, size=m))
    return arrays, starts, sizes


def bench_cone_update(mod, case, calls, repeat):
    arrays, starts, sizes = case
    m = arrays["v"].size
    m_eq = int(starts[0])

    def run():
        v, y, work = arrays["v"].copy(), arrays["y"].copy(), np.empty(m)
        for _ in range(calls):
            mod.cone_update(arrays["vt"], v, y, arrays["b"], arrays["rho"], 1.6, m_eq, starts, sizes, work)
        return v, y

    return _best(run, repeat) / calls, run()


def bench_solve(mod, preset, N, repeat):
    saved = kernels.cone_update, kernels.soc_project_blocks
    kernels.cone_update, kernels.soc_project_blocks = mod.cone_update, mod.soc_project_blocks
    try:
        ocp = load_preset(preset).ocp(N)
        res = None

        def run():
            nonlocal res
            res = solve_ocp(ocp)

        return _best(run, repeat), res
    finally:
        kernels.cone_update, kernels.soc_project_blocks = saved


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--calls", type=int, default=200)
    args = ap.parse_args(argv)
    if kernels.compiled is None:
        raise SystemExit("compiled kernels not built; run `python3 setup.py build_ext --inplace` first")
    backends = {"cython": kernels.compiled, "python": kernels.fallback}
    rng = np.random.default_rng(0)

    print(f"{'kernel case':38s} {'cython [us]':>12s} {'python [us]':>12s} {'speedup':>8s}")
    for n_blocks, block in ((6, 3), (50, 3), (200, 8), (2000, 24)):
        case = _cone_case(n_blocks, block, 4 * n_blocks, rng)
        out = {k: bench_cone_update(m, case, args.calls, args.repeat) for k, m in backends.items()}
        for a, b in zip(out["cython"][1], out["python"][1]):
            np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12)
        tc, tp = out["cython"][0] * 1e6, out["python"][0] * 1e6
        print(f"cone_update {n_blocks:5d} blocks x {block:2d}            {tc:12.2f} {tp:12.2f} {tp / tc:8.1f}")

    print(f"\n{'end-to-end solve':38s} {'cython [s]':>12s} {'python [s]':>12s} {'speedup':>8s}")
    for preset, N in (("example1", 24), ("example1", 50), ("example2", 40), ("example3", 50)):
        out = {k: bench_solve(m, preset, N, args.repeat) for k, m in backends.items()}
        dobj = abs(out["cython"][1].objective - out["python"][1].objective)
        tc, tp = out["cython"][0], out["python"][0]
        print(f"{preset} N={N:<3d} (|d objective| {dobj:.1e})    {tc:12.4f} {tp:12.4f} {tp / tc:8.1f}")


if __name__ == "__main__":
    main()
