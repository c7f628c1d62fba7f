"""Discretized reference measures with exact quadrature and exact sampling.

A measure is a partition of an interval into N cells with analytically
computed cell masses.  Functions are integrated by the midpoint rule and
sampled by inverse CDF: a categorical draw over cells followed by a uniform
jitter inside the chosen cell (so downstream evaluations happen off-grid).
GraphOfF lifts each 1-D point x to the curve point (x, f(x)).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import ndtr

from .exceptions import DegenerateDensity, InvalidShape, InvalidSpec, NumericalError

Array = np.ndarray

GAUSSIAN = "GaussianTruncated"
UNIFORM01 = "Uniform01"
UNIFORM_SYM = "UniformSym"
GRAPH_OF_F = "GraphOfF"

KINDS = (GAUSSIAN, UNIFORM01, UNIFORM_SYM, GRAPH_OF_F)

DEFAULT_CELLS = {GAUSSIAN: 100_000, UNIFORM01: 2**17, UNIFORM_SYM: 100_000, GRAPH_OF_F: 10_000}


@dataclass(eq=False)
class DiscretizedMeasure:
    """N-cell discretization of a probability measure on an interval.

    nodes are the cell midpoints; cell_masses the exact measure of each cell
    (they sum to 1).  lift, when present, maps arrays of x values to curve
    points.  Instances hash by identity for caching.
    """

    kind: str
    edges: Array
    nodes: Array
    cell_masses: Array
    lift: Optional[Callable[[Array], Array]] = None
    params: dict = field(default_factory=dict)

    _cummass: Optional[Array] = field(default=None, repr=False)

    @property
    def n_cells(self) -> int:
        return len(self.nodes)

    def lift_points(self, x: Array) -> Array:
        """Map 1-D x values into the measure's support."""
        if self.lift is None:
            return x
        return np.column_stack([x, self.lift(x)])

    def points(self) -> Array:
        """Lifted cell midpoints — the canonical evaluation grid."""
        return self.lift_points(self.nodes)

    def quadrature(self, f) -> float:
        """Midpoint-rule integral of f (a callable on points, or node values)."""
        values = f(self.points()) if callable(f) else np.asarray(f, dtype=float)
        if values.shape != self.nodes.shape:
            raise InvalidShape(f"expected {self.nodes.shape} values, got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise NumericalError("non-finite integrand values")
        return float(values @ self.cell_masses)

    def sample(self, density_values: Array, count: int, rng: np.random.Generator) -> Array:
        """Draw `count` points from the density (relative to this measure).

        Cells are drawn categorically with probability proportional to
        density * cell mass, then the point is placed uniformly inside the
        cell.  Consumes exactly two length-`count` uniform batches from rng.
        """
        dv = np.asarray(density_values, dtype=float)
        if dv.shape != self.nodes.shape:
            raise InvalidShape(f"expected {self.nodes.shape} density values, got {dv.shape}")
        if dv.min() < 0.0:
            if dv.min() < -1e-9 * max(dv.max(), 1.0):
                raise InvalidSpec("density values must be nonnegative")
            dv = np.maximum(dv, 0.0)
        cell_p = dv * self.cell_masses
        cum = np.cumsum(cell_p)
        total = cum[-1]
        if not total > 0.0:
            raise DegenerateDensity("density is zero everywhere")
        u_cell = rng.random(count)
        idx = np.searchsorted(cum, u_cell * total, side="left")
        idx = np.minimum(idx, self.n_cells - 1)
        u_jitter = rng.random(count)
        x = self.edges[idx] + u_jitter * (self.edges[idx + 1] - self.edges[idx])
        return self.lift_points(x)

    def rho_sample(self, count: int, rng: np.random.Generator) -> Array:
        """Draw from the measure itself (unit density), cached CDF."""
        if self._cummass is None:
            self._cummass = np.cumsum(self.cell_masses)
        cum = self._cummass
        u_cell = rng.random(count)
        idx = np.searchsorted(cum, u_cell * cum[-1], side="left")
        idx = np.minimum(idx, self.n_cells - 1)
        u_jitter = rng.random(count)
        x = self.edges[idx] + u_jitter * (self.edges[idx + 1] - self.edges[idx])
        return self.lift_points(x)


def build_measure(
    kind: str,
    n_cells: int | None = None,
    params: dict | None = None,
) -> DiscretizedMeasure:
    """Construct a discretized measure.

    GaussianTruncated: standard normal truncated to [-radius, radius]
    (default radius 10, leaving ~1e-23 tail mass) with erf-difference cell
    masses.  Uniform01 / UniformSym: equal cells on [0,1] / [-1,1].
    GraphOfF: uniform x-cells on [0,1] with lift x -> (x, f(x)); params must
    carry the lift under "lift".
    """
    params = dict(params or {})
    if kind not in KINDS:
        raise InvalidSpec(f"unknown measure kind {kind!r}")
    n = int(n_cells) if n_cells is not None else DEFAULT_CELLS[kind]
    if n < 2:
        raise InvalidSpec("need at least 2 cells")

    if kind == GAUSSIAN:
        radius = float(params.get("radius", 10.0))
        if radius <= 0:
            raise InvalidSpec("radius must be positive")
        edges = np.linspace(-radius, radius, n + 1)
        # difference whichever tail stays far from 1: ndtr saturates to 1.0
        # above ~8.3, which would zero out upper-tail cells and break the
        # lower/upper symmetry
        lo, hi = edges[:-1], edges[1:]
        upper = lo + hi > 0
        masses = np.where(upper, ndtr(-lo) - ndtr(-hi), ndtr(hi) - ndtr(lo))
        masses /= masses.sum()
        lift = None
    elif kind in (UNIFORM01, UNIFORM_SYM):
        lo, hi = (0.0, 1.0) if kind == UNIFORM01 else (-1.0, 1.0)
        edges = np.linspace(lo, hi, n + 1)
        masses = np.full(n, 1.0 / n)
        lift = None
    else:  # GraphOfF
        lift = params.get("lift")
        if not callable(lift):
            raise InvalidSpec("GraphOfF needs a callable under params['lift']")
        edges = np.linspace(0.0, 1.0, n + 1)
        masses = np.full(n, 1.0 / n)

    nodes = (edges[:-1] + edges[1:]) / 2.0
    return DiscretizedMeasure(kind, edges, nodes, masses, lift, params)
