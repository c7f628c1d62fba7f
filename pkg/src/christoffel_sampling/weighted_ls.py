"""Weighted least squares on [-1, 1] and the weight-optimization study.

Given sample points and a Legendre basis, fits by weighted normal
equations and measures the relative L2 error by quadrature.  The weight
optimizer maximizes the smallest eigenvalue of the weighted Gramian
subject to a cap on the largest one — the quantity controlling the
worst-case least-squares error — to test how much nontrivial weights can
actually buy over uniform ones.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from .christoffel import grid_features
from .dictionaries import LEGENDRE, FeatureDictionary, build_dictionary
from .exceptions import DegenerateDensity, InvalidSpec
from .linalg import pinv_floored, sym_eig
from .measures import UNIFORM_SYM, DiscretizedMeasure, build_measure

Array = np.ndarray

DEFAULT_BASIS_DIM = 10
DEFAULT_CAP = 2.0
DEFAULT_N_GRID = (10, 14, 20, 28, 40, 57, 80, 113, 160)


def target_sin(x: Array) -> Array:
    return np.sin(2.0 * np.pi * x)


def target_runge(x: Array) -> Array:
    return 1.0 / (1.0 + 25.0 * x * x)


def target_capped_inverse_square(x: Array) -> Array:
    """min(x^-2, 1e3), with the cap value taken at x = 0."""
    x = np.asarray(x, dtype=float)
    out = np.full_like(x, 1e3)
    nz = x != 0.0
    out[nz] = np.minimum(1.0 / (x[nz] * x[nz]), 1e3)
    return out


def target_indicator(x: Array) -> Array:
    x = np.asarray(x, dtype=float)
    return ((x >= 0.0) & (x <= 1.0)).astype(float)


TARGETS: dict[str, Callable[[Array], Array]] = {
    "sin2pi": target_sin,
    "runge": target_runge,
    "invsq": target_capped_inverse_square,
    "indicator": target_indicator,
}


@dataclass(eq=False)
class WeightedLSProblem:
    points: Array
    basis: FeatureDictionary
    target: Callable[[Array], Array]
    weights: Array

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)
        self.weights = np.asarray(self.weights, dtype=float)
        if self.points.ndim != 1 or self.points.size < 1:
            raise InvalidSpec("need at least one sample point")
        if self.weights.shape != self.points.shape:
            raise InvalidSpec("weights must match points")
        if np.any(self.weights < 0.0):
            raise InvalidSpec("weights must be nonnegative")


def legendre_basis(dimension: int = DEFAULT_BASIS_DIM) -> FeatureDictionary:
    return build_dictionary({"family": LEGENDRE, "dimension": dimension})


@lru_cache(maxsize=1)
def error_measure() -> DiscretizedMeasure:
    return build_measure(UNIFORM_SYM)


def weighted_gramian(points: Array, basis: FeatureDictionary, weights: Array) -> Array:
    feats = basis.eval_batch(np.asarray(points, dtype=float))
    return (feats * np.asarray(weights, dtype=float)[:, None]).T @ feats


def weighted_lsq(
    problem: WeightedLSProblem,
    measure: Optional[DiscretizedMeasure] = None,
) -> tuple[Array, float]:
    """Fit by weighted normal equations; return coefficients and rel. L2 error.

    The error is ||u - fit|| / ||u|| in L2 of the uniform measure on
    [-1, 1], both norms by quadrature.
    """
    if not np.any(problem.weights > 0.0):
        raise DegenerateDensity("all weights are zero")
    if measure is None:
        measure = error_measure()
    feats = problem.basis.eval_batch(problem.points)
    u_samples = problem.target(problem.points)
    g_w = (feats * problem.weights[:, None]).T @ feats
    rhs = feats.T @ (problem.weights * u_samples)
    coeffs = pinv_floored(sym_eig(g_w)) @ rhs
    grid = measure.points()
    u_grid = problem.target(grid)
    fit_grid = grid_features(problem.basis, measure) @ coeffs
    err2 = measure.quadrature((u_grid - fit_grid) ** 2)
    norm2 = measure.quadrature(u_grid**2)
    return coeffs, float(np.sqrt(err2 / norm2))


def scaled_uniform_weights(points: Array, basis: FeatureDictionary, cap: float = DEFAULT_CAP) -> Array:
    """Uniform weights scaled so the weighted Gramian tops out at the cap."""
    points = np.asarray(points, dtype=float)
    g1 = weighted_gramian(points, basis, np.ones(points.size))
    lam_max = float(np.linalg.eigvalsh(g1)[-1])
    if lam_max <= 0.0:
        raise DegenerateDensity("sample Gramian is zero")
    return np.full(points.size, cap / lam_max)


def optimize_weights(
    points: Array,
    basis: FeatureDictionary,
    cap: float = DEFAULT_CAP,
    max_iters: int = 500,
    stall_tol: float = 1e-8,
) -> Array:
    """Maximize lambda_min of the weighted Gramian subject to lambda_max <= cap.

    Supergradient ascent: the gradient of lambda_min in w_i is the squared
    projection of the minimal eigenvector onto the i-th feature row, and
    since the Gramian is linear in w, feasibility is restored exactly by
    scaling.  Step size adapts by doubling/halving on success/failure; the
    best feasible iterate is kept, so the result never falls below the
    scaled-uniform starting point.
    """
    points = np.asarray(points, dtype=float)
    feats = basis.eval_batch(points)

    def eval_feasible(w: Array) -> tuple[Array, float, Array]:
        g = (feats * w[:, None]).T @ feats
        lam, vecs = np.linalg.eigh(g)
        if lam[-1] > cap:
            scale = cap / lam[-1]
            w = w * scale
            lam = lam * scale
        return w, float(lam[0]), vecs[:, 0]

    w, best_val, v_min = eval_feasible(scaled_uniform_weights(points, basis, cap))
    w_best = w
    step = 0.1 * float(np.mean(w))
    stalled = 0
    for _ in range(max_iters):
        grad = (feats @ v_min) ** 2
        scale = float(np.max(grad))
        if scale <= 0.0 or step < 1e-16:
            break
        candidate, value, v_cand = eval_feasible(w + (step / scale) * grad)
        if value > best_val + stall_tol:
            w_best, best_val = candidate, value
            w, v_min = candidate, v_cand
            step *= 1.5
            stalled = 0
        else:
            step *= 0.5
            stalled += 1
            if stalled >= 60:
                break
    return w_best


def run_reweighting_study(
    rng: np.random.Generator,
    n_grid=DEFAULT_N_GRID,
    repetitions: int = 10,
    basis: Optional[FeatureDictionary] = None,
    cap: float = DEFAULT_CAP,
) -> list[tuple[str, int, int, str, float]]:
    """Rows (target, n, rep, method, rel_error) comparing the two weightings.

    Each (n, rep) cell draws one uniform point set shared by both methods
    and all targets; the weight optimization runs once per cell.
    """
    if basis is None:
        basis = legendre_basis()
    measure = error_measure()
    rows: list[tuple[str, int, int, str, float]] = []
    for n in n_grid:
        for rep in range(repetitions):
            points = rng.uniform(-1.0, 1.0, size=int(n))
            naive_w = np.full(points.size, 1.0 / points.size)
            optimal_w = optimize_weights(points, basis, cap=cap)
            for name, fn in TARGETS.items():
                for method, w in (("naive", naive_w), ("optimal", optimal_w)):
                    problem = WeightedLSProblem(points, basis, fn, w)
                    _, err = weighted_lsq(problem, measure)
                    rows.append((name, int(n), rep, method, err))
    return rows
