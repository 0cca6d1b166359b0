"""Orthogonal polynomial families used as PCE germ bases.

Two families are supported: probabilists' Hermite polynomials (orthogonal
under the standard Gaussian) and shifted Legendre polynomials on ``[0, 1]``
(orthogonal under the standard uniform law). Both are kept monic, so that
``phi_1`` is ``theta`` and ``xi - 0.5`` respectively.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal

__all__ = [
    "Family",
    "PolynomialBasis",
    "Quadrature",
    "hermite_basis",
    "legendre_basis",
    "evaluate",
    "gauss_quadrature",
]


class Family(enum.Enum):
    HERMITE = "hermite_probabilists"
    LEGENDRE = "legendre_unit_interval"


def _recurrence(family: Family, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Monic three-term recurrence coefficients ``a_k, b_k`` for ``k < n``.

    ``p_{k+1}(x) = (x - a_k) p_k(x) - b_k p_{k-1}(x)`` with ``b_0 = 1``
    (the total mass of the probability measure).
    """
    k = np.arange(n, dtype=float)
    if family is Family.HERMITE:
        a = np.zeros(n)
        b = k.copy()
    else:
        a = np.full(n, 0.5)
        b = k**2 / (4.0 * (4.0 * k**2 - 1.0))
    if n:
        b[0] = 1.0
    return a, b


@dataclass(frozen=True)
class Quadrature:
    nodes: np.ndarray
    weights: np.ndarray

    def integrate(self, f) -> float:
        return float(np.dot(self.weights, f(self.nodes)))


@dataclass(frozen=True)
class PolynomialBasis:
    """A univariate monic orthogonal family truncated at ``max_degree``.

    ``norms[i]`` is ``<phi_i, phi_i>`` under the germ's probability measure;
    it is computed once by Gauss quadrature when the basis is built.
    """

    family: Family
    max_degree: int
    recurrence_a: np.ndarray = field(repr=False)
    recurrence_b: np.ndarray = field(repr=False)
    norms: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.norms is None:
            quad = gauss_quadrature(self, self.max_degree + 1)
            vals = _eval_all(self.recurrence_a, self.recurrence_b, self.max_degree, quad.nodes)
            object.__setattr__(self, "norms", (vals**2) @ quad.weights)

    def __call__(self, degree: int, x):
        return evaluate(self, degree, x)


def _build(family: Family, max_degree: int) -> PolynomialBasis:
    if max_degree < 0:
        raise ValueError(f"max_degree must be nonnegative, got {max_degree}")
    a, b = _recurrence(family, max_degree + 1)
    return PolynomialBasis(family, int(max_degree), a, b)


def hermite_basis(max_degree: int) -> PolynomialBasis:
    """Probabilists' Hermite polynomials for a standard Gaussian germ."""
    return _build(Family.HERMITE, max_degree)


def legendre_basis(max_degree: int) -> PolynomialBasis:
    """Shifted Legendre polynomials for a germ uniform on ``[0, 1]``."""
    return _build(Family.LEGENDRE, max_degree)


def _eval_all(a, b, degree, x):
    x = np.asarray(x, dtype=float)
    out = np.empty((degree + 1,) + x.shape)
    out[0] = 1.0
    if degree >= 1:
        out[1] = x - a[0]
    for k in range(1, degree):
        out[k + 1] = (x - a[k]) * out[k] - b[k] * out[k - 1]
    return out


def evaluate(basis: PolynomialBasis, degree: int, germ_value):
    """Value of ``phi_degree`` at ``germ_value`` (scalar or array)."""
    if not 0 <= degree <= basis.max_degree:
        raise ValueError(f"degree {degree} outside [0, {basis.max_degree}]")
    vals = _eval_all(basis.recurrence_a, basis.recurrence_b, degree, germ_value)[degree]
    return float(vals) if np.ndim(vals) == 0 else vals


def gauss_quadrature(basis: PolynomialBasis, n_nodes: int) -> Quadrature:
    """Golub-Welsch Gauss rule for the germ measure of ``basis``.

    The rule is exact for polynomials up to degree ``2 * n_nodes - 1`` and the
    weights sum to one.
    """
    if n_nodes < 1:
        raise ValueError(f"n_nodes must be >= 1, got {n_nodes}")
    a, b = _recurrence(basis.family, n_nodes)
    try:
        nodes, vecs = eigh_tridiagonal(a, np.sqrt(b[1:]))
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise ArithmeticError("tridiagonal eigendecomposition failed") from exc
    weights = vecs[0] ** 2
    weights /= weights.sum()
    if basis.family is Family.HERMITE:
        nodes = 0.5 * (nodes - nodes[::-1])  # exact symmetry
        weights = 0.5 * (weights + weights[::-1])
    return Quadrature(nodes, weights)
