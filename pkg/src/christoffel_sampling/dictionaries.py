"""Feature dictionaries and their analytically known Gramians.

A dictionary is a family of D functions evaluated in bulk on arrays of
points.  One-dimensional families take an array of shape (n,); the bivariate
monomial family takes points of shape (n, 2).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .exceptions import InvalidSpec
from .linalg import SpectralGramian, sym_eig

Array = np.ndarray

HERMITE = "Hermite"
MONOMIAL = "Monomial"
RANDOM_MIXED = "RandomMixed"
STEP = "Step"
BIVARIATE_MONOMIAL = "BivariateMonomial"
LEGENDRE = "Legendre"

FAMILIES = (HERMITE, MONOMIAL, RANDOM_MIXED, STEP, BIVARIATE_MONOMIAL, LEGENDRE)

#: Dyadic breakpoints (0, 2^-17, 2^-16, ..., 1) giving 18 cells.
DYADIC_BREAKPOINTS = (0.0,) + tuple(2.0 ** -j for j in range(17, -1, -1))


def hermite_normalized(x: Array, degree_count: int) -> Array:
    """Probabilists' Hermite polynomials scaled to unit Gaussian L2 norm.

    Three-term recurrence in the normalized basis:
    h_{j+1}(x) = (x h_j(x) - sqrt(j) h_{j-1}(x)) / sqrt(j+1).
    """
    x = np.asarray(x, dtype=float)
    out = np.empty(x.shape + (degree_count,))
    out[..., 0] = 1.0
    if degree_count > 1:
        out[..., 1] = x
    for j in range(1, degree_count - 1):
        out[..., j + 1] = (x * out[..., j] - np.sqrt(j) * out[..., j - 1]) / np.sqrt(j + 1)
    return out


def legendre_orthonormal(x: Array, degree_count: int) -> Array:
    """Legendre polynomials orthonormal for the uniform measure on [-1, 1]."""
    x = np.asarray(x, dtype=float)
    p = np.empty(x.shape + (degree_count,))
    p[..., 0] = 1.0
    if degree_count > 1:
        p[..., 1] = x
    for j in range(1, degree_count - 1):
        p[..., j + 1] = ((2 * j + 1) * x * p[..., j] - j * p[..., j - 1]) / (j + 1)
    # L2(uniform) normalization: int P_j^2 d(uniform) = 1/(2j+1)
    return p * np.sqrt(2.0 * np.arange(degree_count) + 1.0)


def monomials(x: Array, degree_count: int) -> Array:
    x = np.asarray(x, dtype=float)
    return np.vander(x, degree_count, increasing=True)


@dataclass(eq=False)
class FeatureDictionary:
    """One of the supported feature families, evaluatable in bulk.

    params carries family-specific data: mixing matrix S (RandomMixed),
    breakpoints (Step), per-axis degree (BivariateMonomial).  Instances hash
    by identity (they are immutable in practice) so grid caches can key on
    them.
    """

    family: str
    dimension: int
    params: dict = field(default_factory=dict)

    @property
    def domain(self):
        """(lo, hi) interval, ((0,1),(0,1)) for the bivariate family, or None for all reals."""
        if self.family == STEP:
            return (0.0, 1.0)
        if self.family == LEGENDRE:
            return (-1.0, 1.0)
        if self.family == BIVARIATE_MONOMIAL:
            return ((0.0, 1.0), (0.0, 1.0))
        return None

    def contains(self, point) -> bool:
        dom = self.domain
        if dom is None:
            return bool(np.all(np.isfinite(point)))
        if self.family == BIVARIATE_MONOMIAL:
            x, y = np.asarray(point, dtype=float).reshape(2)
            return (dom[0][0] <= x <= dom[0][1]) and (dom[1][0] <= y <= dom[1][1])
        lo, hi = dom
        return bool(np.all((np.asarray(point) >= lo) & (np.asarray(point) <= hi)))

    # -- evaluation ---------------------------------------------------------

    def eval_batch(self, points: Array) -> Array:
        """Feature matrix of shape (n, D) at n points."""
        if self.family == HERMITE:
            return hermite_normalized(points, self.dimension)
        if self.family == MONOMIAL:
            return monomials(points, self.dimension)
        if self.family == LEGENDRE:
            return legendre_orthonormal(points, self.dimension)
        if self.family == STEP:
            return self._step_batch(points)
        if self.family == RANDOM_MIXED:
            return self.eval_base_batch(points) @ self.params["mixing"].T
        if self.family == BIVARIATE_MONOMIAL:
            return self._bivariate_batch(points)
        raise InvalidSpec(f"unknown family {self.family!r}")

    def eval_one(self, point) -> Array:
        if self.family == BIVARIATE_MONOMIAL:
            return self.eval_batch(np.asarray(point, dtype=float).reshape(1, 2))[0]
        return self.eval_batch(np.asarray([point], dtype=float))[0]

    def _step_batch(self, points: Array) -> Array:
        beta = self.params["breakpoints"]
        x = np.asarray(points, dtype=float)
        idx = np.searchsorted(beta, x, side="right") - 1
        # cells are [b_j, b_{j+1}) except the last, which is closed at 1
        idx = np.clip(idx, 0, self.dimension - 1)
        out = np.zeros(x.shape + (self.dimension,))
        out[np.arange(x.size), idx] = 1.0
        return out

    def _bivariate_batch(self, points: Array) -> Array:
        d = self.params["degree"]
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        vx = np.vander(pts[:, 0], d, increasing=True)
        vy = np.vander(pts[:, 1], d, increasing=True)
        # feature index j*d + k holds x^j y^k
        return np.einsum("nj,nk->njk", vx, vy).reshape(len(pts), d * d)

    # -- base factorization (used by the fast sampler) -----------------------

    @property
    def mixing(self) -> Optional[Array]:
        """Matrix S with features = S @ base-features, or None when identity."""
        if self.family == RANDOM_MIXED:
            return self.params["mixing"]
        return None

    @property
    def base_dimension(self) -> int:
        if self.family == RANDOM_MIXED:
            return self.params["mixing"].shape[1]
        return self.dimension

    def eval_base_batch(self, points: Array) -> Array:
        if self.family == RANDOM_MIXED:
            return monomials(points, self.base_dimension)
        return self.eval_batch(points)

    @property
    def has_disjoint_support(self) -> bool:
        """True when distinct base features never overlap (step indicators)."""
        return self.family == STEP


def build_dictionary(spec: dict, rng: np.random.Generator | None = None) -> FeatureDictionary:
    """Construct a dictionary from a {family, ...} spec.

    RandomMixed draws its Gaussian mixing matrix from `rng` (resampled until
    it has full column rank) unless the spec carries an explicit matrix.
    """
    family = spec.get("family")
    if family not in FAMILIES:
        raise InvalidSpec(f"unknown dictionary family {family!r}")

    if family == HERMITE:
        dim = int(spec.get("dimension", 8))
        _require_positive(dim)
        return FeatureDictionary(HERMITE, dim)

    if family == MONOMIAL:
        dim = int(spec.get("dimension", 8))
        _require_positive(dim)
        return FeatureDictionary(MONOMIAL, dim)

    if family == LEGENDRE:
        dim = int(spec.get("dimension", 10))
        _require_positive(dim)
        return FeatureDictionary(LEGENDRE, dim)

    if family == STEP:
        beta = np.asarray(spec.get("breakpoints", DYADIC_BREAKPOINTS), dtype=float)
        if beta.ndim != 1 or len(beta) < 2 or np.any(np.diff(beta) <= 0):
            raise InvalidSpec("breakpoints must be strictly increasing")
        if beta[0] != 0.0 or beta[-1] != 1.0:
            raise InvalidSpec("breakpoints must start at 0 and end at 1")
        return FeatureDictionary(STEP, len(beta) - 1, {"breakpoints": beta})

    if family == BIVARIATE_MONOMIAL:
        d = int(spec.get("degree", 8))
        _require_positive(d)
        return FeatureDictionary(BIVARIATE_MONOMIAL, d * d, {"degree": d})

    # RandomMixed
    dim = int(spec.get("dimension", 16))
    base = int(spec.get("base_dimension", 8))
    _require_positive(dim)
    _require_positive(base)
    if "mixing" in spec:
        mixing = np.asarray(spec["mixing"], dtype=float)
        if mixing.shape != (dim, base):
            raise InvalidSpec(f"mixing matrix must be {dim}x{base}")
    else:
        if rng is None:
            raise InvalidSpec("RandomMixed needs an rng to draw its mixing matrix")
        while True:
            mixing = rng.standard_normal((dim, base))
            if np.linalg.matrix_rank(mixing) == base:
                break
    return FeatureDictionary(RANDOM_MIXED, dim, {"mixing": mixing})


def _require_positive(value: int) -> None:
    if value <= 0:
        raise InvalidSpec("dimension must be a positive integer")


def gaussian_moments(max_power: int) -> Array:
    """Raw moments E[x^i] of the standard Gaussian, i = 0..max_power."""
    m = np.zeros(max_power + 1)
    m[0] = 1.0
    for i in range(2, max_power + 1, 2):
        m[i] = m[i - 2] * (i - 1)
    return m


def exact_gramian(dictionary: FeatureDictionary, measure) -> Optional[SpectralGramian]:
    """Closed-form Gramian for the (family, measure-kind) pairs that have one.

    Returns None when no analytic form is available; callers fall back to
    grid quadrature.  `measure` may be a DiscretizedMeasure or its kind
    string.
    """
    kind = getattr(measure, "kind", measure)
    fam = dictionary.family
    d = dictionary.dimension
    if fam == HERMITE and kind == "GaussianTruncated":
        return sym_eig(np.eye(d))
    if fam == LEGENDRE and kind == "UniformSym":
        return sym_eig(np.eye(d))
    if fam == STEP and kind == "Uniform01":
        return sym_eig(np.diag(np.diff(dictionary.params["breakpoints"])))
    if fam == MONOMIAL and kind == "GaussianTruncated":
        mom = gaussian_moments(2 * (d - 1))
        hankel = mom[np.add.outer(np.arange(d), np.arange(d))]
        return sym_eig(hankel)
    if fam == RANDOM_MIXED and kind == "GaussianTruncated":
        s = dictionary.params["mixing"]
        base = s.shape[1]
        mom = gaussian_moments(2 * (base - 1))
        hankel = mom[np.add.outer(np.arange(base), np.arange(base))]
        return sym_eig(s @ hankel @ s.T)
    return None
