"""Iterative Gramian refinement by importance-weighted running averages.

Each step draws points from the mixture measure proportional to
zbar_k + K_{G_k} relative to the reference measure, forms the weighted
outer-product estimate of the true Gramian, and folds it into the running
average G_{k+1} = (k G_k + T_k) / (k+1).  Exact-weight, estimated-weight
(with a choice of regularizer policies), and naive Monte Carlo updates all
share this shape, so their traces are comparable at equal sample counts.

Sampling is the hot path.  A step's cell probabilities are linear in the
entries of the floored inverse of G_k:

    (zbar + K(node_i)) * mass_i
        = zbar * mass_i + sum_{a<=b} coeff_ab * b_a(node_i) b_b(node_i) mass_i

so the categorical CDF at any cell is a dot product of per-pair cumulative
tables (precomputed once per dictionary/measure pair) with coefficients
read off the current inverse.  Drawing then bisects the implicit CDF
without materializing a grid-sized density each step.  The implicit path
consumes the same uniform batches in the same order as
DiscretizedMeasure.sample and agrees with it except on draws landing
within float rounding of a cell boundary.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional, Union

import numpy as np

from .christoffel import (
    MixtureWeights,
    christoffel_on_grid,
    christoffel_values,
    estimate_z_hat,
    normalization_z,
)
from .dictionaries import FeatureDictionary
from .exceptions import DegenerateDensity, InvalidSpec, NumericalError
from .linalg import (
    DEFAULT_FLOOR_EPSILON,
    DEFAULT_RANK_TOLERANCE,
    SpectralGramian,
    floored_inverse_factor,
    sym_eig,
)
from .measures import DiscretizedMeasure

Array = np.ndarray

MODE_EXACT = "ExactWeights"
MODE_ESTIMATED = "EstimatedWeights"
MODE_NAIVE = "NaiveMC"
MODES = (MODE_EXACT, MODE_ESTIMATED, MODE_NAIVE)

J_ZERO = "Zero"
J_SCALED_IDENTITY = "ScaledIdentity"
J_SCALED_SELF = "ScaledSelf"
J_POLICIES = (J_ZERO, J_SCALED_IDENTITY, J_SCALED_SELF)

RUNNING_SCHEDULE = "running"

# Pair tables are built only while n_pairs * n_cells stays below this;
# larger problems fall back to materializing the density on the grid.
PAIR_TABLE_LIMIT = 8_000_000


@dataclass(frozen=True)
class ConstraintSpec:
    """Optional post-update constraints on the Gramian estimate.

    min_eig floors the nonzero eigenvalues of the updated estimate at a
    schedule value c_k: a positive float (constant), the string "running"
    for c_k = (k-1)/k, or a callable k -> c_k.  pin_b1 rescales the matrix
    so its (1,1) entry is exactly 1 — valid when the first dictionary
    function is the constant 1, and forcing K >= 1 everywhere.
    """

    min_eig: Union[None, float, str, Callable[[int], float]] = None
    pin_b1: bool = False

    def __post_init__(self):
        m = self.min_eig
        if m is None or callable(m):
            return
        if isinstance(m, str):
            if m != RUNNING_SCHEDULE:
                raise InvalidSpec(f"unknown min_eig schedule {m!r}")
            return
        if isinstance(m, (int, float)):
            if m < 0:
                raise InvalidSpec("min_eig floor must be nonnegative")
            return
        raise InvalidSpec("min_eig must be None, a float, 'running', or a callable")

    def floor_value(self, k: int) -> Optional[float]:
        if self.min_eig is None:
            return None
        if callable(self.min_eig):
            return float(self.min_eig(k))
        if isinstance(self.min_eig, str):
            return (k - 1.0) / k
        return float(self.min_eig)


@dataclass(frozen=True)
class RefinementConfig:
    mode: str = MODE_EXACT
    n: int = 1
    m: int = 1
    j_policy: str = J_ZERO
    k_max: int = 100
    floor_epsilon: float = DEFAULT_FLOOR_EPSILON
    rank_tolerance: float = DEFAULT_RANK_TOLERANCE
    constraint: Optional[ConstraintSpec] = None
    seed: int = 0

    def __post_init__(self):
        if self.mode not in MODES:
            raise InvalidSpec(f"unknown mode {self.mode!r}")
        if self.j_policy not in J_POLICIES:
            raise InvalidSpec(f"unknown regularizer policy {self.j_policy!r}")
        if self.n < 1:
            raise InvalidSpec("n must be at least 1")
        if self.m < 1:
            raise InvalidSpec("m must be at least 1")
        if self.k_max < 1:
            raise InvalidSpec("k_max must be at least 1")
        if self.floor_epsilon < 0 or self.rank_tolerance < 0:
            raise InvalidSpec("tolerances must be nonnegative")


@dataclass(eq=False)
class RefinementState:
    """k counts the terms folded into the running average so far."""

    k: int
    g_hat: SpectralGramian
    cumulative_samples: int
    rng: np.random.Generator
    half_step: Optional[Array] = None  # raw estimate from the latest step


def empirical_gramian(dictionary: FeatureDictionary, points, weights=None) -> Array:
    """Mean of w_i B(x_i)B(x_i)' over the points (unit weights by default)."""
    feats = dictionary.eval_batch(np.asarray(points, dtype=float))
    if weights is None:
        return feats.T @ feats / feats.shape[0]
    w = np.asarray(weights, dtype=float)
    return (feats * w[:, None]).T @ feats / feats.shape[0]


def init_gramian(
    dictionary: FeatureDictionary,
    measure: DiscretizedMeasure,
    n: int,
    rng: np.random.Generator,
    *,
    floor_epsilon: float = DEFAULT_FLOOR_EPSILON,
    rank_tolerance: float = DEFAULT_RANK_TOLERANCE,
) -> RefinementState:
    """Bootstrap estimate from n reference-measure draws; counts as term 1."""
    if n < 1:
        raise InvalidSpec("n must be at least 1")
    x = measure.rho_sample(n, rng)
    g0 = empirical_gramian(dictionary, x)
    gram = sym_eig(g0, rank_tolerance=rank_tolerance, floor_epsilon=floor_epsilon)
    return RefinementState(k=1, g_hat=gram, cumulative_samples=n, rng=rng, half_step=g0)


class PairPlan:
    """Cumulative tables turning cell CDF lookups into coefficient dots.

    For base features b_1..b_d on the grid nodes, stores per-pair tables
    cums[q, i] = sum_{j<=i} b_a(node_j) b_b(node_j) mass_j over pairs
    q = (a, b) with a <= b, plus the plain mass cumsum.  Any Gramian's
    mixture CDF is then zbar * cummass + coeff @ cums with coefficients
    from its floored inverse (off-diagonal pairs doubled by symmetry).
    Dictionaries with mutually disjoint supports only need the diagonal
    pairs.  A linear mixing of the base (features = S @ base) is folded
    into the coefficients as S' P S.
    """

    def __init__(self, dictionary: FeatureDictionary, measure: DiscretizedMeasure):
        base = dictionary.eval_base_batch(measure.points())
        n_cells, d_base = base.shape
        if dictionary.has_disjoint_support:
            pi = pj = np.arange(d_base)
        else:
            pi, pj = np.triu_indices(d_base)
        self.pairs_i = pi
        self.pairs_j = pj
        self.doubling = np.where(pi == pj, 1.0, 2.0)
        prods = base[:, pi] * base[:, pj] * measure.cell_masses[:, None]
        self.cums = np.ascontiguousarray(np.cumsum(prods, axis=0).T)
        self.cummass = np.cumsum(measure.cell_masses)
        self.mixing = dictionary.mixing
        self.n_cells = n_cells
        self.bisect_iters = int(np.ceil(np.log2(max(n_cells, 2)))) + 1

    def coefficients(self, h: SpectralGramian) -> Array:
        a = floored_inverse_factor(h)
        p = a @ a.T
        if self.mixing is not None:
            p = self.mixing.T @ p @ self.mixing
        return p[self.pairs_i, self.pairs_j] * self.doubling

    def cdf_at(self, coeff: Array, zbar: float, idx: Array) -> Array:
        return zbar * self.cummass[idx] + coeff @ self.cums[:, idx]

    def total(self, coeff: Array, zbar: float) -> float:
        return float(zbar * self.cummass[-1] + coeff @ self.cums[:, -1])


@dataclass(eq=False)
class SamplerContext:
    dictionary: FeatureDictionary
    measure: DiscretizedMeasure
    plan: Optional[PairPlan]


@lru_cache(maxsize=8)
def sampler_context(dictionary: FeatureDictionary, measure: DiscretizedMeasure) -> SamplerContext:
    """Per-(dictionary, measure) sampling tables, cached by object identity."""
    d_base = dictionary.base_dimension
    n_pairs = d_base if dictionary.has_disjoint_support else d_base * (d_base + 1) // 2
    plan = None
    if n_pairs * measure.n_cells <= PAIR_TABLE_LIMIT:
        plan = PairPlan(dictionary, measure)
    return SamplerContext(dictionary, measure, plan)


def draw_mixture(
    context: SamplerContext,
    h: SpectralGramian,
    zbar: float,
    count: int,
    rng: np.random.Generator,
) -> Array:
    """Draw from the measure with density zbar + K_h, matching .sample()."""
    measure = context.measure
    plan = context.plan
    if plan is None:
        density = zbar + christoffel_on_grid(h, context.dictionary, measure)
        return measure.sample(density, count, rng)
    coeff = plan.coefficients(h)
    total = plan.total(coeff, zbar)
    if not np.isfinite(total):
        raise NumericalError("non-finite mixture mass")
    if not total > 0.0:
        raise DegenerateDensity("density is zero everywhere")
    targets = rng.random(count) * total
    lo = np.full(count, -1)
    hi = np.full(count, plan.n_cells - 1)
    active = (hi - lo) > 1
    for _ in range(plan.bisect_iters):
        if not active.any():
            break
        mid = (lo + hi) // 2
        ge = plan.cdf_at(coeff, zbar, np.maximum(mid, 0)) >= targets
        hi = np.where(active & ge, mid, hi)
        lo = np.where(active & ~ge, mid, lo)
        active = (hi - lo) > 1
    idx = hi
    u_jitter = rng.random(count)
    x = measure.edges[idx] + u_jitter * (measure.edges[idx + 1] - measure.edges[idx])
    return measure.lift_points(x)


def regularizer_mass(g_hat: SpectralGramian, j_policy: str, k: int) -> float:
    """zbar_k = <pinv(G_k), J_k>, evaluated on the shared eigensystem."""
    if j_policy == J_ZERO:
        return 0.0
    lam = g_hat.eigenvalues
    lam_max = lam[0] if lam.size else 0.0
    floored = np.maximum(lam, g_hat.floor_epsilon * lam_max)
    inv = np.zeros_like(floored)
    pos = floored > 0.0
    inv[pos] = 1.0 / floored[pos]
    if j_policy == J_SCALED_IDENTITY:
        return float(inv.sum() / k)
    if j_policy == J_SCALED_SELF:
        return float((lam * inv).sum() / g_hat.dim)
    raise InvalidSpec(f"unknown regularizer policy {j_policy!r}")


def _apply_constraints(
    matrix: Array, config: RefinementConfig, k: int
) -> SpectralGramian:
    gram = sym_eig(matrix, rank_tolerance=config.rank_tolerance, floor_epsilon=config.floor_epsilon)
    spec = config.constraint
    if spec is None:
        return gram
    if spec.min_eig is not None:
        floor = spec.floor_value(k)
        if floor > 0.0 and gram.eigenvalues.size:
            lam = gram.eigenvalues.copy()
            nonzero = lam > gram.rank_tolerance * lam[0]
            if nonzero.any() and lam[nonzero].min() < floor:
                lam[nonzero] = np.maximum(lam[nonzero], floor)
                gram = SpectralGramian(
                    matrix=(gram.eigenvectors * lam) @ gram.eigenvectors.T,
                    eigenvalues=lam,
                    eigenvectors=gram.eigenvectors,
                    rank_tolerance=config.rank_tolerance,
                    floor_epsilon=config.floor_epsilon,
                )
    if spec.pin_b1:
        g11 = float(gram.matrix[0, 0])
        if g11 <= 0.0:
            raise NumericalError("cannot pin the (1,1) entry: it is nonpositive")
        if g11 != 1.0:
            gram = SpectralGramian(
                matrix=gram.matrix / g11,
                eigenvalues=gram.eigenvalues / g11,
                eigenvectors=gram.eigenvectors,
                rank_tolerance=config.rank_tolerance,
                floor_epsilon=config.floor_epsilon,
            )
    return gram


def refine_step(
    state: RefinementState,
    config: RefinementConfig,
    dictionary: FeatureDictionary,
    measure: DiscretizedMeasure,
    g_true: Optional[SpectralGramian] = None,
) -> RefinementState:
    """One adaptive update: sample the current mixture, reweight, average.

    Estimated mode draws the m normalization points before the n mixture
    points, so the rng stream order is part of the contract.
    """
    if config.mode == MODE_NAIVE:
        return naive_mc_step(state, config, dictionary, measure)
    context = sampler_context(dictionary, measure)
    if config.mode == MODE_ESTIMATED:
        zbar = regularizer_mass(state.g_hat, config.j_policy, state.k)
        z_hat = estimate_z_hat(state.g_hat, dictionary, measure, config.m, state.rng)
        weights = MixtureWeights(zbar=zbar, z_hat=z_hat, m=config.m)
    else:
        if g_true is None:
            raise InvalidSpec("exact-weight mode needs the true Gramian")
        weights = MixtureWeights(zbar=0.0, z_exact=normalization_z(state.g_hat, g_true))
    x = draw_mixture(context, state.g_hat, weights.zbar, config.n, state.rng)
    k_vals = christoffel_values(state.g_hat, dictionary, x)
    w = (weights.zbar + weights.z_star) / (weights.zbar + k_vals)
    half = empirical_gramian(dictionary, x, w)
    updated = (state.k * state.g_hat.matrix + half) / (state.k + 1)
    gram = _apply_constraints(updated, config, state.k + 1)
    return RefinementState(
        k=state.k + 1,
        g_hat=gram,
        cumulative_samples=state.cumulative_samples + config.n,
        rng=state.rng,
        half_step=half,
    )


def naive_mc_step(
    state: RefinementState,
    config: RefinementConfig,
    dictionary: FeatureDictionary,
    measure: DiscretizedMeasure,
) -> RefinementState:
    """Baseline update from unweighted reference-measure draws."""
    y = measure.rho_sample(config.n, state.rng)
    half = empirical_gramian(dictionary, y)
    updated = (state.k * state.g_hat.matrix + half) / (state.k + 1)
    gram = _apply_constraints(updated, config, state.k + 1)
    return RefinementState(
        k=state.k + 1,
        g_hat=gram,
        cumulative_samples=state.cumulative_samples + config.n,
        rng=state.rng,
        half_step=half,
    )


@dataclass(frozen=True)
class TraceRow:
    k: int
    kn: int
    gamma: float


@dataclass(eq=False)
class StepRecord:
    k: int
    kn: int
    gamma: float
    g_hat: SpectralGramian
    half_step: Optional[Array]


def run_refinement(
    config: RefinementConfig,
    dictionary: FeatureDictionary,
    measure: DiscretizedMeasure,
    g_true: SpectralGramian,
    record: Optional[Callable[[StepRecord], None]] = None,
) -> list[TraceRow]:
    """Full trajectory: init, k_max - 1 steps, per-step diagnostics.

    Deterministic given config.seed.  A framing failure is recorded as
    gamma = +inf rather than aborting the run.
    """
    from .metrics import suboptimality

    if g_true is None:
        raise InvalidSpec("the true Gramian is required for diagnostics")
    rng = np.random.default_rng(config.seed)
    state = init_gramian(
        dictionary,
        measure,
        config.n,
        rng,
        floor_epsilon=config.floor_epsilon,
        rank_tolerance=config.rank_tolerance,
    )
    rows: list[TraceRow] = []

    def push(st: RefinementState) -> None:
        try:
            gamma = suboptimality(st.g_hat, g_true)
        except Exception:
            gamma = float("inf")
        row = TraceRow(k=st.k, kn=st.cumulative_samples, gamma=gamma)
        rows.append(row)
        if record is not None:
            record(StepRecord(row.k, row.kn, row.gamma, st.g_hat, st.half_step))

    push(state)
    while state.k < config.k_max:
        state = refine_step(state, config, dictionary, measure, g_true)
        push(state)
    return rows
