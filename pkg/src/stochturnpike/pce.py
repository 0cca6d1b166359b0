"""Germ spaces and random vectors represented by degree-one PCE coefficients.

Every random quantity in the LQ pipeline is an affine function of a finite
set of independent germs, so the joint basis is ``{1} U {phi_1(germ)}``:
index 0 is the constant and index ``j >= 1`` is the linear polynomial of
germ ``j - 1``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .orthopoly import hermite_basis, legendre_basis

__all__ = [
    "GermFamily",
    "GermComponent",
    "GermSpace",
    "PceVector",
    "GermRealization",
    "GermMismatchError",
    "Normal",
    "Uniform",
    "Fixed",
    "mean",
    "variance",
    "sample",
    "sample_many",
    "draw_germs",
    "draw_germ_matrix",
    "lump_noise",
    "random_vector",
]

_HERMITE = hermite_basis(1)
_LEGENDRE = legendre_basis(1)


class GermMismatchError(ValueError):
    """A realization does not cover the germs a PCE vector lives on."""


class GermFamily(enum.Enum):
    GAUSSIAN = "gaussian"
    UNIFORM01 = "uniform01"

    @property
    def basis(self):
        return _HERMITE if self is GermFamily.GAUSSIAN else _LEGENDRE

    @property
    def norm(self) -> float:
        return float(self.basis.norms[1])

    def phi1(self, value):
        return self.basis(1, value)


@dataclass(frozen=True)
class GermComponent:
    id: str
    family: GermFamily
    time_tag: int | None = None
    channel: int | None = None

    @property
    def is_noise(self) -> bool:
        return self.time_tag is not None


@dataclass(frozen=True)
class GermSpace:
    """Ordered independent germs together with the implied degree-one basis."""

    components: tuple[GermComponent, ...] = ()
    norms: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        comps = tuple(self.components)
        object.__setattr__(self, "components", comps)
        ids = [c.id for c in comps]
        if len(set(ids)) != len(ids):
            raise ValueError("germ ids must be unique within a GermSpace")
        norms = np.array([1.0] + [c.family.norm for c in comps])
        norms.setflags(write=False)
        object.__setattr__(self, "norms", norms)
        object.__setattr__(self, "_index", {cid: i + 1 for i, cid in enumerate(ids)})

    @property
    def dim(self) -> int:
        return 1 + len(self.components)

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(c.id for c in self.components)

    def index_of(self, germ_id: str) -> int:
        return self._index[germ_id]

    def noise_indices(self) -> np.ndarray:
        return np.array([i + 1 for i, c in enumerate(self.components) if c.is_noise], dtype=int)

    def init_indices(self) -> np.ndarray:
        return np.array([i + 1 for i, c in enumerate(self.components) if not c.is_noise], dtype=int)

    def time_tags(self) -> np.ndarray:
        """Per-basis-index time tag; ``-1`` for the constant and initial germs."""
        tags = [-1] + [c.time_tag if c.is_noise else -1 for c in self.components]
        return np.array(tags, dtype=int)

    def concat(self, other: "GermSpace") -> "GermSpace":
        return GermSpace(self.components + other.components)

    def basis_values(self, values: np.ndarray) -> np.ndarray:
        """Evaluate ``[1, phi_1(g_0), ...]`` for germ draws of shape ``(..., n_comp)``."""
        values = np.asarray(values, dtype=float)
        out = np.empty(values.shape[:-1] + (self.dim,))
        out[..., 0] = 1.0
        for i, c in enumerate(self.components):
            out[..., i + 1] = c.family.phi1(values[..., i])
        return out


@dataclass(frozen=True)
class PceVector:
    """Random vector ``sum_j coeffs[:, j] * phi_j`` over ``space``."""

    coeffs: np.ndarray
    space: GermSpace

    def __post_init__(self):
        c = np.atleast_2d(np.asarray(self.coeffs, dtype=float))
        if c.shape[1] != self.space.dim:
            raise ValueError(
                f"coefficient matrix has {c.shape[1]} columns, germ space has dimension {self.space.dim}"
            )
        if not np.all(np.isfinite(c)):
            raise ValueError("PCE coefficients must be finite")
        object.__setattr__(self, "coeffs", c)

    @property
    def n(self) -> int:
        return self.coeffs.shape[0]

    def embed(self, space: GermSpace) -> "PceVector":
        """Re-express on a larger space that contains every germ of ``self.space``."""
        out = np.zeros((self.n, space.dim))
        out[:, 0] = self.coeffs[:, 0]
        for j, gid in enumerate(self.space.ids, start=1):
            out[:, space.index_of(gid)] = self.coeffs[:, j]
        return PceVector(out, space)


@dataclass(frozen=True)
class GermRealization:
    """One draw ``omega``: a value for every germ, keyed by germ id."""

    values: Mapping[str, float]

    def __post_init__(self):
        object.__setattr__(self, "values", dict(self.values))

    def __getitem__(self, germ_id: str) -> float:
        return self.values[germ_id]

    def vector_for(self, space: GermSpace) -> np.ndarray:
        try:
            return np.array([self.values[g] for g in space.ids], dtype=float)
        except KeyError as exc:
            raise GermMismatchError(f"realization has no value for germ {exc.args[0]!r}") from None

    def merged(self, other: "GermRealization") -> "GermRealization":
        return GermRealization({**self.values, **other.values})


# -- laws used to build PCE vectors from marginal specifications ------------


@dataclass(frozen=True)
class Normal:
    mean: float
    variance: float

    def __post_init__(self):
        if not self.variance > 0:
            raise ValueError("Normal variance must be positive")

    family = GermFamily.GAUSSIAN

    def coefficients(self) -> tuple[float, float]:
        return float(self.mean), float(np.sqrt(self.variance))


@dataclass(frozen=True)
class Uniform:
    lb: float
    ub: float

    def __post_init__(self):
        if not self.ub > self.lb:
            raise ValueError("Uniform requires lb < ub")

    family = GermFamily.UNIFORM01

    def coefficients(self) -> tuple[float, float]:
        # lb + (ub - lb) * xi  ==  mid + width * (xi - 0.5)
        return 0.5 * (self.lb + self.ub), float(self.ub - self.lb)


@dataclass(frozen=True)
class Fixed:
    value: float


def random_vector(laws: Sequence[Normal | Uniform | Fixed], prefix: str = "x0") -> PceVector:
    """Independent components, one fresh germ per non-degenerate law."""
    comps, cols = [], []
    for i, law in enumerate(laws):
        if isinstance(law, Fixed):
            continue
        comps.append(GermComponent(f"{prefix}[{i}]", law.family))
        cols.append(i)
    space = GermSpace(tuple(comps))
    coeffs = np.zeros((len(laws), space.dim))
    for i, law in enumerate(laws):
        if isinstance(law, Fixed):
            coeffs[i, 0] = law.value
    for j, i in enumerate(cols, start=1):
        coeffs[i, 0], coeffs[i, j] = laws[i].coefficients()
    return PceVector(coeffs, space)


# -- moments and sampling ---------------------------------------------------


def mean(v: PceVector) -> np.ndarray:
    return v.coeffs[:, 0].copy()


def variance(v: PceVector) -> np.ndarray:
    return (v.coeffs[:, 1:] ** 2) @ v.space.norms[1:]


def sample(v: PceVector, g: GermRealization) -> np.ndarray:
    """Evaluate the expansion at one germ draw (exact for the affine basis)."""
    phi = v.space.basis_values(g.vector_for(v.space))
    return v.coeffs @ phi


def sample_many(v: PceVector, draws: np.ndarray) -> np.ndarray:
    """Vectorized sampling; ``draws`` has shape ``(count, n_components)``."""
    return v.space.basis_values(draws) @ v.coeffs.T


def draw_germ_matrix(space: GermSpace, seed, count: int) -> np.ndarray:
    """``count`` i.i.d. germ draws as an array of shape ``(count, n_components)``.

    ``seed`` is an integer or a ``numpy.random.SeedSequence``; the stream is
    PCG64, so draws are reproducible given the seed.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed)
    out = np.empty((count, len(space.components)))
    gauss = np.array([c.family is GermFamily.GAUSSIAN for c in space.components], dtype=bool)
    raw_n = rng.standard_normal((count, int(gauss.sum())))
    raw_u = rng.random((count, int((~gauss).sum())))
    out[:, gauss] = raw_n
    out[:, ~gauss] = raw_u
    return out


def draw_germs(space: GermSpace, seed, count: int) -> list[GermRealization]:
    mat = draw_germ_matrix(space, seed, count)
    ids = space.ids
    return [GermRealization(dict(zip(ids, row.tolist()))) for row in mat]


def lump_noise(v: PceVector, k: int | None = None) -> np.ndarray:
    """Single equivalent Gaussian coefficient for the noise germs of ``v``.

    Sums squared coefficients over Gaussian noise germs with time tag below
    ``k`` (all noise germs if ``k`` is None). For presentation only.
    """
    idx = []
    for j, c in enumerate(v.space.components, start=1):
        if not c.is_noise or (k is not None and c.time_tag >= k):
            continue
        if c.family is not GermFamily.GAUSSIAN:
            raise ValueError(f"cannot lump non-Gaussian noise germ {c.id!r}")
        idx.append(j)
    if not idx:
        return np.zeros(v.n)
    return np.sqrt(np.sum(v.coeffs[:, idx] ** 2, axis=1))


def noise_is_gaussian(space: GermSpace) -> bool:
    return all(c.family is GermFamily.GAUSSIAN for c in space.components if c.is_noise)


