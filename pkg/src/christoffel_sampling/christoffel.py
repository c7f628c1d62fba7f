"""Inverse Christoffel functions, normalizations, and mixture weights.

The inverse Christoffel function of a Gramian H is
K_H(x) = B(x)' H^+ B(x), evaluated throughout via the floored
pseudo-inverse so that directions H underestimates stay heavily sampled.
The refinement measure is the mixture (zbar + K_H) / (zbar + z) * rho with
matching importance weight (zbar + z*) / (zbar + K_H).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from .dictionaries import FeatureDictionary
from .exceptions import DegenerateDensity, DomainError, InvalidSpec
from .linalg import SpectralGramian, floored_inverse_factor, frobenius_inner, pinv_floored
from .measures import DiscretizedMeasure

Array = np.ndarray


@dataclass
class MixtureWeights:
    """Normalization data for a mixture sampling measure.

    zbar is the regularizer mass (0 for the pure Christoffel measure);
    z_exact and z_hat are the exact and Monte Carlo normalizations of K_H,
    at least one of which must be present.  m records the sample count
    behind z_hat.
    """

    zbar: float = 0.0
    z_exact: Optional[float] = None
    z_hat: Optional[float] = None
    m: Optional[int] = None

    def __post_init__(self):
        if self.zbar < 0:
            raise InvalidSpec("zbar must be nonnegative")
        if self.z_exact is None and self.z_hat is None:
            raise InvalidSpec("need z_exact or z_hat")

    @property
    def z_star(self) -> float:
        """The normalization used in weights: z_hat when present, else exact."""
        return self.z_hat if self.z_hat is not None else self.z_exact


@lru_cache(maxsize=16)
def grid_features(dictionary: FeatureDictionary, measure: DiscretizedMeasure) -> Array:
    """Feature matrix on the measure's midpoint grid, cached per pair."""
    return dictionary.eval_batch(measure.points())


def christoffel_values(h: SpectralGramian, dictionary: FeatureDictionary, points: Array) -> Array:
    """K_h at an array of points (no domain checks — caller's responsibility)."""
    feats = dictionary.eval_batch(points)
    half = feats @ floored_inverse_factor(h)
    return np.einsum("ij,ij->i", half, half)


def christoffel_on_grid(
    h: SpectralGramian, dictionary: FeatureDictionary, measure: DiscretizedMeasure
) -> Array:
    """K_h on the measure's evaluation grid, using the cached feature matrix."""
    half = grid_features(dictionary, measure) @ floored_inverse_factor(h)
    return np.einsum("ij,ij->i", half, half)


def inverse_christoffel(h: SpectralGramian, dictionary: FeatureDictionary, x) -> float:
    """K_h at a single point of the dictionary's domain."""
    if not dictionary.contains(x):
        raise DomainError(f"point {x!r} outside dictionary domain {dictionary.domain}")
    b = dictionary.eval_one(x)
    half = b @ floored_inverse_factor(h)
    return float(half @ half)


def normalization_z(h: SpectralGramian, g_true: SpectralGramian) -> float:
    """Exact normalization of K_h: the Frobenius inner <h^+, G>.

    Equals the integral of K_h against the reference measure; for h = G it
    is the rank of G.
    """
    return frobenius_inner(pinv_floored(h), g_true.matrix)


def mixture_density(
    h: SpectralGramian,
    dictionary: FeatureDictionary,
    measure: DiscretizedMeasure,
    weights: MixtureWeights,
) -> tuple[Array, Callable[[Array], Array]]:
    """Node-wise mixture density (zbar + K_h) and its weight function.

    The density values feed measures.sample; weight_fn evaluates
    (zbar + z*) / (zbar + K_h) at arbitrary points.  With zbar = 0 and an
    exact z this is the optimal-weight pair: weight * K_h == z everywhere.
    """
    density = weights.zbar + christoffel_on_grid(h, dictionary, measure)
    if not np.any(density > 0.0):
        raise DegenerateDensity("mixture density vanishes on the whole grid")
    numerator = weights.zbar + weights.z_star
    factor = floored_inverse_factor(h)

    def weight_fn(points: Array) -> Array:
        half = dictionary.eval_batch(points) @ factor
        k_vals = np.einsum("ij,ij->i", half, half)
        return numerator / (weights.zbar + k_vals)

    return density, weight_fn


def estimate_z_hat(
    h: SpectralGramian,
    dictionary: FeatureDictionary,
    measure: DiscretizedMeasure,
    m: int,
    rng: np.random.Generator,
) -> float:
    """Monte Carlo normalization: mean of K_h over m draws from the measure."""
    if m < 1:
        raise InvalidSpec("m must be at least 1")
    y = measure.rho_sample(m, rng)
    return float(np.mean(christoffel_values(h, dictionary, y)))
