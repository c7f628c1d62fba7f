"""Experiment orchestration: specs, seeded sweeps, CSV and manifest output.

An ExperimentSpec is pure data (JSON-friendly), so runs are reproducible
from the manifest alone: rebuild the spec, rerun, get byte-identical CSVs.
Per-repetition rngs are seeded as seed XOR rep, making repetitions
independent of execution order and of the worker count.
"""

from __future__ import annotations

import csv
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
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
from .dictionaries import build_dictionary, exact_gramian
from .exceptions import ChristoffelError, ConfigError
from .measures import build_measure
from .metrics import DEFAULT_QUANTILE_LEVELS, reduce_quantiles
from .refinement import (
    J_ZERO,
    MODE_EXACT,
    RefinementConfig,
    run_refinement,
)
from .weighted_ls import DEFAULT_N_GRID, run_reweighting_study

Array = np.ndarray

KIND_REFINEMENT = "refinement"
KIND_CD = "cd"
KIND_WEIGHTED_LS = "weighted-ls"
KINDS = (KIND_REFINEMENT, KIND_CD, KIND_WEIGHTED_LS)

BOUND_P = 0.75  # probability level quoted alongside every fan plot


@dataclass(frozen=True)
class ExperimentSpec:
    id: str
    kind: str = KIND_REFINEMENT
    dictionary: Optional[dict] = None
    measure: Optional[dict] = None
    mode: str = MODE_EXACT
    j_policy: str = J_ZERO
    n: int = 1
    m: int = 1
    k_max: int = 100
    repetitions: int = 10
    seed: int = 0
    record_every: Optional[int] = None  # None -> log-spaced steps
    epsilon: float = 1e-3  # cd only
    degree: int = 8  # cd only
    n_grid: tuple = DEFAULT_N_GRID  # weighted-ls only


def validate_spec(spec: ExperimentSpec) -> None:
    if not spec.id or not all(c.isalnum() or c in "._-" for c in spec.id):
        raise ConfigError(f"experiment id {spec.id!r} is empty or not filesystem-safe")
    if spec.kind not in KINDS:
        raise ConfigError(f"unknown experiment kind {spec.kind!r}")
    if spec.repetitions < 1:
        raise ConfigError("repetitions must be at least 1")
    if spec.seed < 0:
        raise ConfigError("seed must be nonnegative")
    if spec.record_every is not None and spec.record_every < 1:
        raise ConfigError("record_every must be at least 1")
    if spec.kind == KIND_REFINEMENT and (spec.dictionary is None or spec.measure is None):
        raise ConfigError("refinement experiments need dictionary and measure specs")


def record_steps(k_max: int, record_every: Optional[int] = None) -> list[int]:
    """Steps to keep in traces: {1..9, 10, 20, ..} log-spaced, or a stride."""
    if record_every is not None:
        ks = set(range(1, k_max + 1, record_every))
    else:
        ks = set()
        scale = 1
        while scale <= k_max:
            for j in range(1, 10):
                if j * scale <= k_max:
                    ks.add(j * scale)
            scale *= 10
    ks.add(k_max)
    return sorted(ks)


def format_float(x: float) -> str:
    return "%.17g" % float(x)


def _resolve_refinement(spec: ExperimentSpec):
    rng = np.random.default_rng(spec.seed)  # only RandomMixed consumes it
    dictionary = build_dictionary(spec.dictionary, rng)
    measure = build_measure(**spec.measure)
    g_true = exact_gramian(dictionary, measure)
    if g_true is None:
        raise ConfigError(
            f"no closed-form Gramian for {spec.dictionary} over {spec.measure}"
        )
    return dictionary, measure, g_true


def _rep_gammas(spec, rep, dictionary, measure, g_true, steps) -> list[float]:
    config = RefinementConfig(
        mode=spec.mode,
        n=spec.n,
        m=spec.m,
        j_policy=spec.j_policy,
        k_max=spec.k_max,
        seed=spec.seed ^ rep,
    )
    rows = run_refinement(config, dictionary, measure, g_true)
    wanted = set(steps)
    return [row.gamma for row in rows if row.k in wanted]


def _refinement_worker(args) -> list[float]:
    spec, rep, steps = args
    dictionary, measure, g_true = _resolve_refinement(spec)
    return _rep_gammas(spec, rep, dictionary, measure, g_true, steps)


def _run_refinement_experiment(spec: ExperimentSpec, out_dir: Path, jobs: int) -> dict:
    steps = record_steps(spec.k_max, spec.record_every)
    if jobs > 1:
        tasks = [(spec, rep, steps) for rep in range(spec.repetitions)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            per_rep = list(pool.map(_refinement_worker, tasks))
    else:
        dictionary, measure, g_true = _resolve_refinement(spec)
        per_rep = [
            _rep_gammas(spec, rep, dictionary, measure, g_true, steps)
            for rep in range(spec.repetitions)
        ]
    kns = [k * spec.n for k in steps]
    values = np.asarray(per_rep, dtype=float)
    trace = reduce_quantiles(steps, values, method=spec.mode, experiment=spec.id)

    reps_path = out_dir / f"{spec.id}_reps.csv"
    with open(reps_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "kn", "rep", "gamma"])
        for rep in range(spec.repetitions):
            for j, k in enumerate(steps):
                writer.writerow([k, kns[j], rep, format_float(values[rep, j])])

    quant_path = out_dir / f"{spec.id}_quantiles.csv"
    with open(quant_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "kn", "level", "gamma"])
        for j, k in enumerate(steps):
            for col, level in enumerate(trace.levels):
                writer.writerow(
                    [k, kns[j], format_float(level), format_float(trace.values[j, col])]
                )

    if jobs > 1:
        dictionary, measure, g_true = _resolve_refinement(spec)
    manifest = {
        "id": spec.id,
        "kind": spec.kind,
        "version": __version__,
        "config": asdict(spec),
        "dimension": dictionary.dimension,
        "rank": g_true.rank,
        "p": BOUND_P,
        "levels": [float(l) for l in trace.levels],
        "files": {"reps": reps_path.name, "quantiles": quant_path.name},
    }
    manifest_path = out_dir / f"{spec.id}_manifest.json"
    _write_manifest(manifest_path, manifest)
    finite = values[np.isfinite(values[:, -1]), -1]
    summary = {
        "id": spec.id,
        "files": [str(reps_path), str(quant_path), str(manifest_path)],
        "final_median_gamma": float(np.median(values[:, -1])),
        "finite_final": int(finite.size),
    }
    return summary


def _run_cd_experiment(spec: ExperimentSpec, out_dir: Path) -> dict:
    problem = CDProblem(epsilon=spec.epsilon, degree=spec.degree)
    dictionary = cd_dictionary(problem)
    measure = cd_measure(problem)
    g_exact = graph_gramian(dictionary, measure)
    f_true = target_f(problem, problem.x_grid)
    f_d_exact = cd_approximation(g_exact, problem, dictionary)

    refined = []
    gammas = []
    errors = []
    g_first = None
    for rep in range(spec.repetitions):
        config = RefinementConfig(
            mode=MODE_EXACT, n=spec.n, k_max=spec.k_max, seed=spec.seed ^ rep
        )
        last = {}
        rows = run_refinement(
            config, dictionary, measure, g_exact, record=lambda r: last.update(g=r.g_hat)
        )
        if g_first is None:
            g_first = last["g"]
        f_d = cd_approximation(last["g"], problem, dictionary)
        refined.append(f_d)
        gammas.append(rows[-1].gamma)
        errors.append(max_error(problem, f_d))

    overlay_path = out_dir / f"{spec.id}.csv"
    with open(overlay_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "f_true", "f_d_exact", "f_d_refined"])
        for j, x in enumerate(problem.x_grid):
            writer.writerow(
                [
                    format_float(x),
                    format_float(f_true[j]),
                    format_float(f_d_exact[j]),
                    format_float(refined[0][j]),
                ]
            )

    kgrid_path = out_dir / f"{spec.id}_kgrid.csv"
    grid = christoffel_grid(g_first, problem, dictionary)
    with open(kgrid_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in grid:
            writer.writerow([format_float(v) for v in row])

    manifest = {
        "id": spec.id,
        "kind": spec.kind,
        "version": __version__,
        "config": asdict(spec),
        "dimension": dictionary.dimension,
        "rank": g_exact.rank,
        "p": BOUND_P,
        "exact_error": max_error(problem, f_d_exact),
        "refined_errors": errors,
        "refined_gammas": [format_float(g) for g in gammas],
        "files": {"overlay": overlay_path.name, "kgrid": kgrid_path.name},
    }
    manifest_path = out_dir / f"{spec.id}_manifest.json"
    _write_manifest(manifest_path, manifest)
    return {
        "id": spec.id,
        "files": [str(overlay_path), str(kgrid_path), str(manifest_path)],
        "exact_error": manifest["exact_error"],
        "median_refined_error": float(np.median(errors)),
    }


def _run_wls_experiment(spec: ExperimentSpec, out_dir: Path) -> dict:
    rng = np.random.default_rng(spec.seed)
    rows = run_reweighting_study(
        rng, n_grid=tuple(spec.n_grid), repetitions=spec.repetitions
    )
    csv_path = out_dir / f"{spec.id}.csv"
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["target", "n", "rep", "method", "rel_error"])
        for target, n, rep, method, err in rows:
            writer.writerow([target, n, rep, method, format_float(err)])
    manifest = {
        "id": spec.id,
        "kind": spec.kind,
        "version": __version__,
        "config": asdict(spec),
        "files": {"errors": csv_path.name},
    }
    manifest_path = out_dir / f"{spec.id}_manifest.json"
    _write_manifest(manifest_path, manifest)
    return {"id": spec.id, "files": [str(csv_path), str(manifest_path)], "rows": len(rows)}


def _write_manifest(path: Path, manifest: dict) -> None:
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def run_experiment(spec: ExperimentSpec, out_dir, jobs: int = 1) -> dict:
    """Run one experiment, write its CSVs and manifest, return a summary."""
    validate_spec(spec)
    out = Path(out_dir)
    os.makedirs(out, exist_ok=True)
    try:
        if spec.kind == KIND_REFINEMENT:
            summary = _run_refinement_experiment(spec, out, jobs)
        elif spec.kind == KIND_CD:
            summary = _run_cd_experiment(spec, out)
        else:
            summary = _run_wls_experiment(spec, out)
    except ChristoffelError as exc:
        raise ConfigError(str(exc)) from exc
    for path in summary["files"]:
        print(f"[{spec.id}] wrote {path}")
    return summary


def spec_from_dict(raw: dict) -> ExperimentSpec:
    """Build a spec from parsed JSON, rejecting unknown keys."""
    if not isinstance(raw, dict):
        raise ConfigError("experiment entry must be a JSON object")
    known = {f.name for f in ExperimentSpec.__dataclass_fields__.values()}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown spec fields: {sorted(unknown)}")
    if "id" not in raw:
        raise ConfigError("experiment spec needs an id")
    raw = dict(raw)
    if "n_grid" in raw:
        raw["n_grid"] = tuple(raw["n_grid"])
    try:
        spec = ExperimentSpec(**raw)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    validate_spec(spec)
    return spec


def load_config(path) -> list[ExperimentSpec]:
    """Parse an experiment config file: one spec or {"experiments": [...]}."""
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    try:
        raw = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {p}: {exc}") from exc
    entries = raw.get("experiments", [raw]) if isinstance(raw, dict) else raw
    if not isinstance(entries, list) or not entries:
        raise ConfigError("config must hold one spec or a nonempty 'experiments' list")
    return [spec_from_dict(entry) for entry in entries]
