import numpy as np
import pytest

from stochturnpike import pce
from stochturnpike.stoch_ocp import (
    Bound,
    ChanceConstraintSpec,
    LinearStochasticSystem,
    NoiseSpec,
    StageCost,
    StochasticOcp,
)


def scalar_ocp(N=24, bounds=True, noise=True, x0=None):
    """x+ = 2x + u + w, cost E[u^2], x0 ~ U[0.6, 1.4], w ~ N(0, 0.25)."""
    system = LinearStochasticSystem([[2.0]], [[1.0]], [[1.0]])
    cost = StageCost.make(1, 1, Ru=[[1.0]])
    if x0 is None:
        x0 = pce.random_vector([pce.Uniform(0.6, 1.4)])
    cons = (ChanceConstraintSpec(state_bounds=(Bound(-2.0, 2.0),), epsilon_x=0.8)
            if bounds else ChanceConstraintSpec())
    ns = NoiseSpec((pce.Normal(0.0, 0.25),))
    if not noise:
        system = LinearStochasticSystem([[2.0]], [[1.0]], np.zeros((1, 0)))
        ns = NoiseSpec(())
    return StochasticOcp(system, cost, N, x0, ns, cons)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
