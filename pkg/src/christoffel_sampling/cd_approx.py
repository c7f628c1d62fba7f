"""Recovering a monotone sigmoid-like function from Gramian estimates.

The target f maps [0,1] to [0,1] through the Gaussian quantile function;
its graph {(x, f(x))} carries a measure whose bivariate-monomial Gramian
concentrates the Christoffel function near the graph.  The approximation
f_d(x) = argmin_y K(x, y) then reads the graph back off the Gramian —
exactly or from a few refinement steps.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import ndtri

from .dictionaries import BIVARIATE_MONOMIAL, FeatureDictionary, build_dictionary
from .exceptions import InvalidSpec
from .linalg import SpectralGramian, floored_inverse_factor, sym_eig
from .measures import GRAPH_OF_F, DiscretizedMeasure, build_measure

Array = np.ndarray

DEFAULT_X_POINTS = 201
DEFAULT_Y_POINTS = 1001


def _default_x_grid() -> Array:
    return np.linspace(0.0, 1.0, DEFAULT_X_POINTS)


def _default_y_grid() -> Array:
    return np.linspace(0.0, 1.0, DEFAULT_Y_POINTS)


@dataclass(eq=False)
class CDProblem:
    """Target parameter and evaluation grids for the graph-recovery study."""

    epsilon: float = 1e-3
    degree: int = 8
    x_grid: Array = field(default_factory=_default_x_grid)
    y_grid: Array = field(default_factory=_default_y_grid)

    def __post_init__(self):
        if not 0.0 < self.epsilon < 0.5:
            raise InvalidSpec("epsilon must lie in (0, 0.5)")
        if self.degree < 1:
            raise InvalidSpec("degree must be at least 1")
        self.x_grid = np.asarray(self.x_grid, dtype=float)
        self.y_grid = np.asarray(self.y_grid, dtype=float)
        for grid in (self.x_grid, self.y_grid):
            if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0):
                raise InvalidSpec("grids must be strictly increasing vectors")
            if grid[0] < 0.0 or grid[-1] > 1.0:
                raise InvalidSpec("grids must lie within [0, 1]")


def target_f(problem: CDProblem, x):
    """f(x) = (q(eps) - q((1-2 eps) x + eps)) / (2 q(eps)), q the normal quantile.

    A smooth [0,1] -> [0,1] bijection with f(0)=0, f(1/2)=1/2, f(1)=1,
    nearly flat except for a sharp rise around 1/2 when epsilon is small.
    """
    eps = problem.epsilon
    q_eps = ndtri(eps)
    x = np.asarray(x, dtype=float)
    value = (q_eps - ndtri((1.0 - 2.0 * eps) * x + eps)) / (2.0 * q_eps)
    return value if value.ndim else float(value)


def cd_dictionary(problem: CDProblem) -> FeatureDictionary:
    return build_dictionary({"family": BIVARIATE_MONOMIAL, "degree": problem.degree})


def cd_measure(problem: CDProblem, n_cells: Optional[int] = None) -> DiscretizedMeasure:
    """Uniform x-measure on [0,1] lifted onto the graph of the target."""
    return build_measure(
        GRAPH_OF_F,
        n_cells=n_cells,
        params={"lift": lambda x: target_f(problem, x)},
    )


def graph_gramian(
    dictionary: FeatureDictionary,
    measure: DiscretizedMeasure,
    *,
    rank_tolerance: float = 1e-12,
    floor_epsilon: float = 1e-12,
) -> SpectralGramian:
    """Exact (quadrature) Gramian of the dictionary over the measure."""
    feats = dictionary.eval_batch(measure.points())
    g = (feats * measure.cell_masses[:, None]).T @ feats
    return sym_eig(g, rank_tolerance=rank_tolerance, floor_epsilon=floor_epsilon)


def christoffel_grid(
    h: SpectralGramian,
    problem: CDProblem,
    dictionary: Optional[FeatureDictionary] = None,
    chunk: int = 16,
) -> Array:
    """K_h on the x_grid x y_grid mesh, shape (len(x_grid), len(y_grid)).

    Evaluated in x-row chunks to keep the feature matrices small.
    """
    if dictionary is None:
        dictionary = cd_dictionary(problem)
    factor = floored_inverse_factor(h)
    nx, ny = problem.x_grid.size, problem.y_grid.size
    out = np.empty((nx, ny))
    for start in range(0, nx, chunk):
        stop = min(start + chunk, nx)
        xs = np.repeat(problem.x_grid[start:stop], ny)
        ys = np.tile(problem.y_grid, stop - start)
        feats = dictionary.eval_batch(np.column_stack([xs, ys]))
        half = feats @ factor
        out[start:stop] = np.einsum("ij,ij->i", half, half).reshape(stop - start, ny)
    return out


def cd_approximation(
    h: SpectralGramian,
    problem: CDProblem,
    dictionary: Optional[FeatureDictionary] = None,
) -> Array:
    """f_d on x_grid: per x, the y-grid point minimizing K_h(x, y).

    np.argmin keeps the first minimizer, so ties resolve toward smaller y.
    """
    grid = christoffel_grid(h, problem, dictionary)
    return problem.y_grid[np.argmin(grid, axis=1)]


def max_error(problem: CDProblem, f_d: Array, lo: float = 0.1, hi: float = 0.9) -> float:
    """Grid max |f_d - f| restricted to x in [lo, hi]."""
    mask = (problem.x_grid >= lo) & (problem.x_grid <= hi)
    truth = target_f(problem, problem.x_grid[mask])
    return float(np.max(np.abs(f_d[mask] - truth)))
