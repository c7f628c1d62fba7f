"""Built-in experiment presets, one per headline study.

The exact-weight presets sweep n in {1, ceil(4 d ln 4d)} against the naive
baseline at the same per-step n; the estimated-weight presets sweep the
normalization sample count m in {1, 100} across the three regularizer
policies.  Default seeds are fixed so rerunning a preset reproduces its
CSVs byte for byte.
"""

from __future__ import annotations

import math

from .dictionaries import HERMITE, RANDOM_MIXED, STEP
from .exceptions import ConfigError
from .harness import KIND_CD, KIND_REFINEMENT, KIND_WEIGHTED_LS, ExperimentSpec
from .measures import GAUSSIAN, UNIFORM01
from .refinement import (
    J_SCALED_IDENTITY,
    J_SCALED_SELF,
    J_ZERO,
    MODE_ESTIMATED,
    MODE_EXACT,
    MODE_NAIVE,
)

DEFAULT_SEED = 7
DEFAULT_REPS = 10
EXACT_K_MAX = 10_000
ESTIMATED_K_MAX = 1_000
CD_N = 1
CD_K_MAX = 11  # init counts as term 1, so this is 10 refinement steps


def oversampled_n(d: int) -> int:
    """ceil(4 d ln(4d)) — the many-samples-per-step regime."""
    return math.ceil(4 * d * math.log(4 * d))


_FAMILIES = {
    "hermite": ({"family": HERMITE, "dimension": 8}, {"kind": GAUSSIAN}, 8),
    "random-poly": (
        {"family": RANDOM_MIXED, "dimension": 16, "base_dimension": 8},
        {"kind": GAUSSIAN},
        16,
    ),
    "step": ({"family": STEP}, {"kind": UNIFORM01}, 18),
}

_POLICY_SLUGS = {
    J_ZERO: "zero",
    J_SCALED_IDENTITY: "scaled-identity",
    J_SCALED_SELF: "scaled-self",
}


def _exact_preset(name: str, seed: int, reps: int) -> list[ExperimentSpec]:
    dictionary, measure, d = _FAMILIES[name]
    specs = []
    for n in (1, oversampled_n(d)):
        for mode, label in ((MODE_EXACT, "exact"), (MODE_NAIVE, "naive")):
            specs.append(
                ExperimentSpec(
                    id=f"{name}-n{n}-{label}",
                    kind=KIND_REFINEMENT,
                    dictionary=dictionary,
                    measure=measure,
                    mode=mode,
                    n=n,
                    k_max=EXACT_K_MAX,
                    repetitions=reps,
                    seed=seed,
                )
            )
    return specs


def _estimated_preset(name: str, seed: int, reps: int) -> list[ExperimentSpec]:
    family = name.removesuffix("-estimated")
    dictionary, measure, _ = _FAMILIES[family]
    specs = []
    for m in (1, 100):
        for policy in (J_ZERO, J_SCALED_IDENTITY, J_SCALED_SELF):
            specs.append(
                ExperimentSpec(
                    id=f"{family}-est-m{m}-{_POLICY_SLUGS[policy]}",
                    kind=KIND_REFINEMENT,
                    dictionary=dictionary,
                    measure=measure,
                    mode=MODE_ESTIMATED,
                    j_policy=policy,
                    n=1,
                    m=m,
                    k_max=ESTIMATED_K_MAX,
                    repetitions=reps,
                    seed=seed,
                )
            )
    specs.append(
        ExperimentSpec(
            id=f"{family}-est-naive",
            kind=KIND_REFINEMENT,
            dictionary=dictionary,
            measure=measure,
            mode=MODE_NAIVE,
            n=1,
            k_max=ESTIMATED_K_MAX,
            repetitions=reps,
            seed=seed,
        )
    )
    return specs


def _cd_preset(seed: int, reps: int) -> list[ExperimentSpec]:
    return [
        ExperimentSpec(
            id="cd",
            kind=KIND_CD,
            n=CD_N,
            k_max=CD_K_MAX,
            repetitions=reps,
            seed=seed,
        )
    ]


def _wls_preset(seed: int, reps: int) -> list[ExperimentSpec]:
    return [
        ExperimentSpec(
            id="weighted-ls",
            kind=KIND_WEIGHTED_LS,
            repetitions=reps,
            seed=seed,
        )
    ]


PRESET_NAMES = (
    "hermite",
    "random-poly",
    "step",
    "hermite-estimated",
    "random-estimated",
    "step-estimated",
    "cd",
    "weighted-ls",
)


def preset_specs(
    name: str, seed: int = DEFAULT_SEED, repetitions: int = DEFAULT_REPS
) -> list[ExperimentSpec]:
    if name in ("hermite", "random-poly", "step"):
        return _exact_preset(name, seed, repetitions)
    if name == "hermite-estimated":
        return _estimated_preset(name, seed, repetitions)
    if name == "random-estimated":
        return _estimated_preset("random-poly-estimated", seed, repetitions)
    if name == "step-estimated":
        return _estimated_preset(name, seed, repetitions)
    if name == "cd":
        return _cd_preset(seed, repetitions)
    if name == "weighted-ls":
        return _wls_preset(seed, repetitions)
    raise ConfigError(f"unknown preset {name!r}; known: {', '.join(PRESET_NAMES)}")
