"""Spectral decompositions, floored pseudo-inverses, and framing pencils.

Everything downstream manipulates symmetric positive semidefinite Gramians
through the `SpectralGramian` wrapper, which keeps the eigendecomposition
next to the matrix so that rank decisions and eigenvalue flooring are made
once, consistently.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .exceptions import DegenerateReference, InvalidMatrix, InvalidShape, NotPSD

Array = np.ndarray

DEFAULT_RANK_TOLERANCE = 1e-12
DEFAULT_FLOOR_EPSILON = 1e-12


@dataclass(eq=False)
class SpectralGramian:
    """A symmetric PSD matrix with its spectral decomposition attached.

    `eigenvalues` are sorted nonincreasing and clamped to be nonnegative;
    `eigenvectors` holds the matching orthonormal columns.  Both tolerances
    are relative to the largest eigenvalue.  Instances are treated as
    immutable; they hash by identity so they can key caches.
    """

    matrix: Array
    eigenvalues: Array
    eigenvectors: Array
    rank_tolerance: float = DEFAULT_RANK_TOLERANCE
    floor_epsilon: float = DEFAULT_FLOOR_EPSILON

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def rank(self) -> int:
        """Number of eigenvalues above rank_tolerance * lambda_max."""
        lam_max = self.eigenvalues[0] if self.eigenvalues.size else 0.0
        return int(np.count_nonzero(self.eigenvalues > self.rank_tolerance * lam_max))

    def range_basis(self) -> Array:
        """Orthonormal columns spanning the numerical range."""
        return self.eigenvectors[:, : self.rank]


class FramingConstants(NamedTuple):
    C: float
    c: float
    gamma: float


def sym_eig(
    matrix: Array,
    rank_tolerance: float = DEFAULT_RANK_TOLERANCE,
    floor_epsilon: float = DEFAULT_FLOOR_EPSILON,
) -> SpectralGramian:
    """Symmetrize and eigendecompose a PSD matrix.

    Raises InvalidMatrix for non-finite input, InvalidShape for non-square
    input, and NotPSD when an eigenvalue falls below
    -rank_tolerance * lambda_max.  Negative eigenvalues inside that band are
    clamped to zero.
    """
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidShape(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InvalidMatrix("matrix has non-finite entries")
    sym = (m + m.T) / 2.0
    lam, vec = np.linalg.eigh(sym)
    lam = lam[::-1].copy()
    vec = vec[:, ::-1].copy()
    lam_max = max(lam[0], 0.0) if lam.size else 0.0
    if lam.size and lam[-1] < -rank_tolerance * lam_max:
        raise NotPSD(
            f"eigenvalue {lam[-1]:.3e} below -{rank_tolerance:g} * {lam_max:.3e}"
        )
    np.maximum(lam, 0.0, out=lam)
    return SpectralGramian(sym, lam, vec, rank_tolerance, floor_epsilon)


def pinv_floored(g: SpectralGramian, floor_epsilon: float | None = None) -> Array:
    """Inverse after flooring eigenvalues at floor_epsilon * lambda_max.

    Every eigenvalue (including exact zeros) is raised to the floor before
    inversion, so directions the matrix underestimates stay present — large —
    in the inverse.  With a zero floor this degrades to the Moore–Penrose
    pseudo-inverse (zero eigenvalues map to zero); the zero matrix maps to
    the zero matrix.
    """
    eps_rel = g.floor_epsilon if floor_epsilon is None else floor_epsilon
    lam_max = g.eigenvalues[0] if g.eigenvalues.size else 0.0
    floored = np.maximum(g.eigenvalues, eps_rel * lam_max)
    inv = np.zeros_like(floored)
    # a zero floor must not invert numerically-zero eigenvalues
    cutoff = g.rank_tolerance * lam_max if eps_rel * lam_max == 0.0 else 0.0
    pos = floored > cutoff
    inv[pos] = 1.0 / floored[pos]
    return (g.eigenvectors * inv) @ g.eigenvectors.T


def floored_inverse_factor(g: SpectralGramian, floor_epsilon: float | None = None) -> Array:
    """Matrix A with A @ A.T = pinv_floored(g); the whitening half-inverse.

    Quadratic forms B'(G floored-inverse)B reduce to row norms of B @ A,
    which is how grids are evaluated in bulk.
    """
    eps_rel = g.floor_epsilon if floor_epsilon is None else floor_epsilon
    lam_max = g.eigenvalues[0] if g.eigenvalues.size else 0.0
    floored = np.maximum(g.eigenvalues, eps_rel * lam_max)
    scale = np.zeros_like(floored)
    cutoff = g.rank_tolerance * lam_max if eps_rel * lam_max == 0.0 else 0.0
    pos = floored > cutoff
    scale[pos] = 1.0 / np.sqrt(floored[pos])
    return g.eigenvectors * scale


def framing_constants(h: SpectralGramian, g: SpectralGramian) -> FramingConstants:
    """Tightest constants framing h by g in the Loewner order.

    Forms the pencil M = diag(lam)^(-1/2) U' h U diag(lam)^(-1/2) on the
    rank-revealing decomposition g = U diag(lam) U' and returns
    C = 1/min-eig(M), c = 1/max-eig(M), gamma = C/c.  Directions of h inside
    ker(g) are ignored (dictionary vectors never point there).  gamma is +inf
    when the pencil is singular at g's rank tolerance.
    """
    if h.dim != g.dim:
        raise InvalidShape(f"dimension mismatch: {h.dim} vs {g.dim}")
    r = g.rank
    if r == 0:
        raise DegenerateReference("reference Gramian has rank zero")
    basis = g.eigenvectors[:, :r] / np.sqrt(g.eigenvalues[:r])
    pencil = basis.T @ h.matrix @ basis
    pencil = (pencil + pencil.T) / 2.0
    mu = np.linalg.eigvalsh(pencil)
    mu_min, mu_max = mu[0], mu[-1]
    big = np.inf if mu_min <= 0.0 else 1.0 / mu_min
    small = np.inf if mu_max <= 0.0 else 1.0 / mu_max
    if mu_min <= g.rank_tolerance * mu_max or mu_max <= 0.0:
        gamma = np.inf
    else:
        gamma = mu_max / mu_min
    return FramingConstants(big, small, gamma)


def frobenius_inner(x: Array, y: Array) -> float:
    """Entrywise inner product sum_ij x_ij y_ij."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise InvalidShape(f"shape mismatch: {x.shape} vs {y.shape}")
    return float(np.sum(x * y))
