import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stochturnpike.orthopoly import (
    Family,
    evaluate,
    gauss_quadrature,
    hermite_basis,
    legendre_basis,
)


def test_hermite_norms_low_degree():
    assert np.allclose(hermite_basis(1).norms, [1.0, 1.0], rtol=0, atol=1e-14)
    assert np.allclose(hermite_basis(0).norms, [1.0])


def test_legendre_norms_low_degree():
    assert np.allclose(legendre_basis(1).norms, [1.0, 1.0 / 12.0], rtol=1e-13)


def test_hermite_norms_are_factorials():
    b = hermite_basis(5)
    assert np.allclose(b.norms, [math.factorial(i) for i in range(6)], rtol=1e-12)


@pytest.mark.parametrize(
    "family,degree,x,expected",
    [
        (Family.HERMITE, 0, 2.3, 1.0),
        (Family.HERMITE, 1, 0.7, 0.7),
        (Family.HERMITE, 1, 0.0, 0.0),
        (Family.LEGENDRE, 1, 0.9, 0.4),
        (Family.LEGENDRE, 1, 0.5, 0.0),
        (Family.LEGENDRE, 1, 1.0, 0.5),
    ],
)
def test_evaluate_examples(family, degree, x, expected):
    basis = hermite_basis(2) if family is Family.HERMITE else legendre_basis(2)
    assert evaluate(basis, degree, x) == pytest.approx(expected, abs=1e-15)


def test_evaluate_matches_explicit_formulas(rng):
    H, P = hermite_basis(3), legendre_basis(3)
    th = rng.standard_normal(100)
    xi = rng.uniform(size=100)
    assert np.allclose(evaluate(H, 1, th), th)
    assert np.allclose(evaluate(H, 2, th), th**2 - 1)
    assert np.allclose(evaluate(H, 3, th), th**3 - 3 * th)
    assert np.allclose(evaluate(P, 1, xi), xi - 0.5)
    # monic shifted Legendre of degree 2: xi^2 - xi + 1/6
    assert np.allclose(evaluate(P, 2, xi), xi**2 - xi + 1.0 / 6.0)


def test_evaluate_degree_out_of_range():
    with pytest.raises(ValueError):
        evaluate(hermite_basis(1), 2, 0.0)
    with pytest.raises(ValueError):
        evaluate(hermite_basis(1), -1, 0.0)


def test_negative_degree_rejected():
    with pytest.raises(ValueError):
        hermite_basis(-1)
    with pytest.raises(ValueError):
        legendre_basis(-1)


def test_quadrature_examples():
    q = gauss_quadrature(legendre_basis(1), 1)
    assert np.allclose(q.nodes, [0.5]) and np.allclose(q.weights, [1.0])
    q = gauss_quadrature(hermite_basis(2), 2)
    assert np.allclose(np.sort(q.nodes), [-1.0, 1.0], atol=1e-14)
    assert np.allclose(q.weights, [0.5, 0.5], atol=1e-14)
    assert q.integrate(lambda t: t**2) == pytest.approx(1.0, abs=1e-14)
    q = gauss_quadrature(legendre_basis(1), 3)
    assert q.integrate(lambda x: x**4) == pytest.approx(0.2, abs=1e-14)


def test_quadrature_rejects_zero_nodes():
    with pytest.raises(ValueError):
        gauss_quadrature(hermite_basis(1), 0)


@pytest.mark.parametrize("make", [hermite_basis, legendre_basis])
@pytest.mark.parametrize("n", [1, 3, 8, 15])
def test_quadrature_weights_are_a_probability(make, n):
    q = gauss_quadrature(make(1), n)
    assert np.all(q.weights >= 0)
    assert abs(q.weights.sum() - 1.0) <= 1e-12


@pytest.mark.parametrize("make", [hermite_basis, legendre_basis])
@pytest.mark.parametrize("max_degree", [1, 3, 6])
def test_orthogonality(make, max_degree):
    b = make(max_degree)
    q = gauss_quadrature(b, max_degree + 1)
    for i in range(max_degree + 1):
        for j in range(max_degree + 1):
            ip = q.integrate(lambda x: b(i, x) * b(j, x))
            expected = b.norms[i] if i == j else 0.0
            assert abs(ip - expected) <= 1e-12 * max(1.0, b.norms[i], b.norms[j])


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 10), p=st.integers(0, 19))
def test_legendre_quadrature_exactness(n, p):
    """n nodes integrate monomials up to degree 2n - 1 exactly on U(0, 1)."""
    if p > 2 * n - 1:
        return
    q = gauss_quadrature(legendre_basis(1), n)
    assert q.integrate(lambda x: x**p) == pytest.approx(1.0 / (p + 1), rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 10), p=st.integers(0, 19))
def test_hermite_quadrature_exactness(n, p):
    if p > 2 * n - 1:
        return
    q = gauss_quadrature(hermite_basis(1), n)
    moment = 0.0 if p % 2 else float(math.prod(range(p - 1, 0, -2)))
    # odd moments vanish by cancellation, so the absolute error scales with the terms
    scale = float(np.dot(q.weights, np.abs(q.nodes) ** p))
    assert q.integrate(lambda t: t**p) == pytest.approx(moment, rel=1e-11, abs=1e-13 * scale)


def test_basis_is_frozen():
    b = hermite_basis(1)
    with pytest.raises(Exception):
        b.max_degree = 3
