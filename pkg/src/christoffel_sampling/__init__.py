"""Iterative refinement of Christoffel-function sampling measures.

Estimate a dictionary's Gramian by importance sampling from the measure
its current estimate says is optimal, fold each batch into a running
average, and track how far the induced sampling measure is from the
optimal one.  Includes the exact-weight, estimated-weight, and naive
Monte Carlo iterations, total-variation and suboptimality diagnostics,
a graph-recovery study, a weighted least-squares study, and a CLI that
reproduces the headline experiments as CSV traces.
"""

__version__ = "0.1.0"

from .exceptions import (
    ChristoffelError,
    ConfigError,
    DegenerateDensity,
    DegenerateReference,
    DomainError,
    InvalidMatrix,
    InvalidShape,
    InvalidSpec,
    NotPSD,
    NumericalError,
)
from .linalg import (
    DEFAULT_FLOOR_EPSILON,
    DEFAULT_RANK_TOLERANCE,
    FramingConstants,
    SpectralGramian,
    floored_inverse_factor,
    framing_constants,
    frobenius_inner,
    pinv_floored,
    sym_eig,
)
from .dictionaries import (
    BIVARIATE_MONOMIAL,
    DYADIC_BREAKPOINTS,
    FAMILIES,
    HERMITE,
    LEGENDRE,
    MONOMIAL,
    RANDOM_MIXED,
    STEP,
    FeatureDictionary,
    build_dictionary,
    exact_gramian,
    gaussian_moments,
    hermite_normalized,
    legendre_orthonormal,
    monomials,
)
from .measures import (
    DEFAULT_CELLS,
    GAUSSIAN,
    GRAPH_OF_F,
    UNIFORM01,
    UNIFORM_SYM,
    DiscretizedMeasure,
    build_measure,
)
from .christoffel import (
    MixtureWeights,
    christoffel_on_grid,
    christoffel_values,
    estimate_z_hat,
    grid_features,
    inverse_christoffel,
    mixture_density,
    normalization_z,
)
from .refinement import (
    J_POLICIES,
    J_SCALED_IDENTITY,
    J_SCALED_SELF,
    J_ZERO,
    MODE_ESTIMATED,
    MODE_EXACT,
    MODE_NAIVE,
    MODES,
    ConstraintSpec,
    PairPlan,
    RefinementConfig,
    RefinementState,
    StepRecord,
    TraceRow,
    draw_mixture,
    empirical_gramian,
    init_gramian,
    naive_mc_step,
    refine_step,
    regularizer_mass,
    run_refinement,
    sampler_context,
)
from .metrics import (
    DEFAULT_QUANTILE_LEVELS,
    QuantileTrace,
    gamma_bound,
    reduce_quantiles,
    suboptimality,
    tv_distance,
)
from .cd_approx import (
    CDProblem,
    cd_approximation,
    cd_dictionary,
    cd_measure,
    christoffel_grid,
    graph_gramian,
    max_error,
    target_f,
)
from .weighted_ls import (
    DEFAULT_N_GRID,
    TARGETS,
    WeightedLSProblem,
    legendre_basis,
    optimize_weights,
    run_reweighting_study,
    scaled_uniform_weights,
    weighted_gramian,
    weighted_lsq,
)
from .harness import (
    ExperimentSpec,
    format_float,
    load_config,
    record_steps,
    run_experiment,
)
from .presets import PRESET_NAMES, preset_specs
