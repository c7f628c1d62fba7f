"""Suboptimality factors, TV distances, bound curves, quantile reduction."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .christoffel import christoffel_on_grid
from .dictionaries import FeatureDictionary
from .exceptions import DegenerateDensity, InvalidSpec
from .linalg import SpectralGramian, framing_constants
from .measures import DiscretizedMeasure

Array = np.ndarray

DEFAULT_QUANTILE_LEVELS = tuple(np.linspace(0.0, 1.0, 11))


def suboptimality(h: SpectralGramian, g_true: SpectralGramian) -> float:
    """The factor the sampling measure of h loses over the optimal one.

    This is the framing ratio C/c of K_h against K_{g_true}; +inf when the
    estimate does not frame the truth at all (e.g. rank-deficient h).  The
    raw matrix enters the pencil — flooring is a sampling device and would
    hide genuine failure here.
    """
    return framing_constants(h, g_true).gamma


def gamma_bound(kn: float, d: int, p: float) -> float:
    """High-probability ceiling for the suboptimality factor after kn draws.

    alpha = sqrt(d-1)/sqrt(1-p); the bound is (sqrt(kn)+alpha)/(sqrt(kn)-alpha),
    or +inf once the denominator is nonpositive.
    """
    if not 0.0 < p < 1.0:
        raise InvalidSpec("p must lie strictly between 0 and 1")
    if kn <= 0:
        raise InvalidSpec("kn must be positive")
    if d < 1:
        raise InvalidSpec("d must be at least 1")
    alpha = np.sqrt(d - 1.0) / np.sqrt(1.0 - p)
    root = np.sqrt(kn)
    if root <= alpha:
        return float("inf")
    return float((root + alpha) / (root - alpha))


def tv_distance(
    h: SpectralGramian,
    g_true: SpectralGramian,
    dictionary: FeatureDictionary,
    measure: DiscretizedMeasure,
) -> float:
    """Total variation between the two normalized sampling densities.

    Half the quadrature of |K_h/z_h - K_g/z_g| against the reference
    measure, both normalizations also by quadrature.
    """
    k_h = christoffel_on_grid(h, dictionary, measure)
    k_g = christoffel_on_grid(g_true, dictionary, measure)
    z_h = measure.quadrature(k_h)
    z_g = measure.quadrature(k_g)
    if not (z_h > 0.0 and z_g > 0.0):
        raise DegenerateDensity("a normalization constant vanished")
    return 0.5 * measure.quadrature(np.abs(k_h / z_h - k_g / z_g))


@dataclass(eq=False)
class QuantileTrace:
    """Per-step quantiles of a scalar diagnostic over repetitions."""

    steps: Array
    levels: Array
    values: Array  # shape (len(steps), len(levels))
    method: str = ""
    experiment: str = ""

    def __post_init__(self):
        self.steps = np.asarray(self.steps)
        self.levels = np.asarray(self.levels, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.steps.size, self.levels.size):
            raise InvalidSpec("quantile table shape does not match steps x levels")


def _interp_quantiles(sorted_column: Array, levels: Array) -> Array:
    """Linear-interpolation quantiles of one pre-sorted sample (+inf safe)."""
    r = sorted_column.size
    pos = levels * (r - 1)
    lo = np.floor(pos).astype(int)
    hi = np.minimum(lo + 1, r - 1)
    frac = pos - lo
    lower = sorted_column[lo]
    upper = sorted_column[hi]
    # the masked branch may evaluate inf - inf; np.where discards it
    with np.errstate(invalid="ignore"):
        interp = lower + frac * (upper - lower)
    return np.where((frac == 0.0) | (upper == lower), lower, interp)


def reduce_quantiles(
    steps,
    per_rep_values,
    levels=DEFAULT_QUANTILE_LEVELS,
    method: str = "",
    experiment: str = "",
) -> QuantileTrace:
    """Reduce per-repetition traces (reps x steps) to per-step quantiles.

    np.quantile is avoided on purpose: its interpolation turns a finite/
    infinite bracket into nan (inf * 0), while the convention here is that
    +inf simply sorts last and interpolates to +inf for any nonzero
    fractional weight on it.
    """
    values = np.asarray(per_rep_values, dtype=float)
    if values.ndim != 2 or values.shape[0] < 1:
        raise InvalidSpec("need a nonempty reps x steps array")
    steps = np.asarray(steps)
    if steps.size != values.shape[1]:
        raise InvalidSpec("steps length does not match trace length")
    lv = np.asarray(levels, dtype=float)
    if lv.size < 1 or lv.min() < 0.0 or lv.max() > 1.0 or np.any(np.diff(lv) < 0):
        raise InvalidSpec("levels must be nondecreasing within [0, 1]")
    sorted_vals = np.sort(values, axis=0)
    table = np.empty((steps.size, lv.size))
    for j in range(steps.size):
        table[j] = _interp_quantiles(sorted_vals[:, j], lv)
    return QuantileTrace(steps=steps, levels=lv, values=table, method=method, experiment=experiment)
