import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from stochturnpike import pce
from stochturnpike.pce import (
    GermComponent,
    GermFamily,
    GermMismatchError,
    GermRealization,
    GermSpace,
    PceVector,
)

G, U = GermFamily.GAUSSIAN, GermFamily.UNIFORM01


def space_of(*families, noise_from=None):
    comps = []
    for i, f in enumerate(families):
        tag = None if noise_from is None or i < noise_from else i - noise_from
        comps.append(GermComponent(f"g{i}", f, time_tag=tag))
    return GermSpace(tuple(comps))


def x0_uniform():
    return pce.random_vector([pce.Uniform(0.6, 1.4)])


# -- germ spaces ---------------------------------------------------------------


def test_space_dimension_and_norms():
    s = space_of(U, G, G)
    assert s.dim == 4
    assert np.allclose(s.norms, [1.0, 1.0 / 12.0, 1.0, 1.0])


def test_duplicate_ids_rejected():
    with pytest.raises(ValueError):
        GermSpace((GermComponent("a", G), GermComponent("a", U)))


def test_time_tags_and_index_sets():
    s = space_of(U, G, G, noise_from=1)
    assert list(s.time_tags()) == [-1, -1, 0, 1]
    assert list(s.init_indices()) == [1]
    assert list(s.noise_indices()) == [2, 3]


def test_pce_vector_validation():
    s = space_of(G)
    with pytest.raises(ValueError):
        PceVector(np.zeros((1, 3)), s)
    with pytest.raises(ValueError):
        PceVector([[0.0, np.inf]], s)


def test_embed_preserves_law():
    v = PceVector([[1.0, 0.3]], space_of(U))
    big = GermSpace((GermComponent("z", G),) + v.space.components)
    e = v.embed(big)
    assert np.allclose(e.coeffs, [[1.0, 0.0, 0.3]])
    assert np.allclose(pce.variance(e), pce.variance(v))


# -- moments -----------------------------------------------------------------


def test_uniform_initial_condition_coefficients():
    v = x0_uniform()
    assert np.allclose(v.coeffs, [[1.0, 0.8]])
    assert pce.mean(v)[0] == pytest.approx(1.0)
    assert pce.variance(v)[0] == pytest.approx(0.64 / 12.0, rel=1e-14)


def test_mean_and_variance_examples():
    z = PceVector(np.zeros((2, 3)), space_of(G, U))
    assert np.all(pce.mean(z) == 0) and np.all(pce.variance(z) == 0)
    g = PceVector([[0.0, -0.5]], space_of(G))
    assert pce.mean(g)[0] == 0.0
    assert pce.variance(g)[0] == pytest.approx(0.25)
    det = PceVector([[3.0, 0.0, 0.0]], space_of(G, U))
    assert pce.variance(det)[0] == 0.0


def test_normal_law_coefficients():
    assert pce.Normal(0.0, 0.25).coefficients() == (0.0, 0.5)
    assert pce.Uniform(-0.1, 0.1).coefficients() == pytest.approx((0.0, 0.2))
    with pytest.raises(ValueError):
        pce.Normal(0.0, 0.0)
    with pytest.raises(ValueError):
        pce.Uniform(1.0, 1.0)


def test_random_vector_fixed_components_are_deterministic():
    v = pce.random_vector([pce.Fixed(2.0), pce.Normal(1.0, 4.0)])
    assert v.space.dim == 2
    assert np.allclose(v.coeffs, [[2.0, 0.0], [1.0, 2.0]])


# -- sampling ----------------------------------------------------------------


def test_sample_examples():
    v = x0_uniform()
    gid = v.space.ids[0]
    assert pce.sample(v, GermRealization({gid: 0.5}))[0] == pytest.approx(1.0)
    assert pce.sample(v, GermRealization({gid: 1.0}))[0] == pytest.approx(1.4)
    det = PceVector([[7.5, 0.0]], v.space)
    assert pce.sample(det, GermRealization({gid: 0.123}))[0] == 7.5


def test_sample_missing_germ():
    v = x0_uniform()
    with pytest.raises(GermMismatchError):
        pce.sample(v, GermRealization({"other": 0.1}))


def test_draws_reproducible():
    s = space_of(G, U, G)
    a = pce.draw_germs(s, 7, 3)
    b = pce.draw_germs(s, 7, 3)
    assert [r.values for r in a] == [r.values for r in b]
    assert pce.draw_germs(s, 8, 3)[0].values != a[0].values


def test_draw_count_validated():
    with pytest.raises(ValueError):
        pce.draw_germ_matrix(space_of(G), 0, 0)


def test_draw_statistics():
    d = pce.draw_germ_matrix(space_of(U, G), 3, 100_000)
    assert abs(d[:, 0].mean() - 0.5) <= 0.005
    assert np.all((d[:, 0] >= 0) & (d[:, 0] <= 1))
    assert abs(d[:, 1].var() - 1.0) <= 0.015


def _random_vector(rng, n, fams):
    s = space_of(*fams)
    return PceVector(rng.normal(size=(n, s.dim)), s)


@pytest.mark.parametrize("fams", [(G,), (U,), (G, U, U, G), (U, U, U)])
def test_moment_monte_carlo_consistency(rng, fams):
    v = _random_vector(rng, 3, fams)
    n = 100_000
    x = pce.sample_many(v, pce.draw_germ_matrix(v.space, 11, n))
    m, var = pce.mean(v), pce.variance(v)
    se_m = np.sqrt(var / n)
    assert np.all(np.abs(x.mean(axis=0) - m) <= 4 * se_m)
    mu4 = ((x - x.mean(axis=0)) ** 4).mean(axis=0)
    se_v = np.sqrt((mu4 - var**2) / n)
    assert np.all(np.abs(x.var(axis=0, ddof=1) - var) <= 4 * se_v)


coeff = st.floats(-10, 10, allow_nan=False)


@settings(max_examples=60, deadline=None)
@given(
    c1=arrays(float, (2, 4), elements=coeff),
    c2=arrays(float, (2, 4), elements=coeff),
    a=coeff,
    b=coeff,
    g=arrays(float, 3, elements=st.floats(0, 1)),
)
def test_sample_is_affine_and_superposes(c1, c2, a, b, g):
    s = space_of(G, U, U)
    v1, v2 = PceVector(c1, s), PceVector(c2, s)
    real = GermRealization(dict(zip(s.ids, g)))
    combo = PceVector(a * c1 + b * c2, s)
    lhs = pce.sample(combo, real)
    rhs = a * pce.sample(v1, real) + b * pce.sample(v2, real)
    assert np.allclose(lhs, rhs, rtol=1e-10, atol=1e-9)
    # explicit expansion: mean + sum_j c_j phi_j(g)
    phi = np.array([g[0], g[1] - 0.5, g[2] - 0.5])
    assert np.allclose(pce.sample(v1, real), pce.mean(v1) + c1[:, 1:] @ phi, rtol=1e-12, atol=1e-9)


# -- lumping ---------------------------------------------------------------


def test_lump_pythagorean():
    s = space_of(U, G, G, noise_from=1)
    v = PceVector([[0.0, 1.0, 0.3, 0.4]], s)
    assert pce.lump_noise(v)[0] == pytest.approx(0.5)
    assert pce.lump_noise(v, k=1)[0] == pytest.approx(0.3)
    zero = PceVector([[1.0, 1.0, 0.0, 0.0]], s)
    assert pce.lump_noise(zero)[0] == 0.0


def test_lump_rejects_uniform_noise():
    s = space_of(G, U, noise_from=0)
    v = PceVector([[0.0, 0.1, 0.2]], s)
    with pytest.raises(ValueError):
        pce.lump_noise(v)
    assert not pce.noise_is_gaussian(s)


@settings(max_examples=60, deadline=None)
@given(c=arrays(float, (3, 5), elements=coeff))
def test_lump_squared_plus_init_variance_is_variance(c):
    s = space_of(U, G, G, G, noise_from=1)
    v = PceVector(c, s)
    init_var = c[:, 1] ** 2 / 12.0
    assert np.allclose(pce.lump_noise(v) ** 2 + init_var, pce.variance(v), rtol=1e-12, atol=1e-12)
