"""Loaders that turn study CSVs into plot-ready arrays.

Three file kinds are understood, matching the christoffel-sampling output
contract:

* refinement trajectories — ``step,kn,rep,gamma`` (one curve per
  repetition) or ``step,kn,level,gamma`` (one curve per quantile level),
  where ``gamma`` may be ``inf``;
* Christoffel-Darboux level sets — a dense numeric matrix whose rows
  follow the overlay's ``x`` column and whose columns sample the unit
  interval uniformly, next to an overlay ``x,f_true,<fits...>``;
* reweighting error tables — ``target,n,rep,method,rel_error``.

Loaders validate shape and numeric content and group rows; the only
aggregation performed anywhere is the per-group display median of the
error tables.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

Array = np.ndarray

QUANTILE_HEADER = ("step", "kn", "level", "gamma")
REP_HEADER = ("step", "kn", "rep", "gamma")
ERROR_HEADER = ("target", "n", "rep", "method", "rel_error")

KIND_QUANTILES = "quantiles"
KIND_REPS = "reps"


class SchemaError(Exception):
    """The input file does not match the expected CSV contract."""


def _read_rows(path) -> tuple[tuple[str, ...], list[list[str]]]:
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise SchemaError(f"{path}: empty file")
    return tuple(rows[0]), rows[1:]


def _parse_float(token: str, path, column: str, allow_inf: bool = False) -> float:
    try:
        value = float(token)
    except ValueError as exc:
        raise SchemaError(f"{path}: bad {column} value {token!r}") from exc
    if math.isnan(value) or (not allow_inf and math.isinf(value)):
        raise SchemaError(f"{path}: non-finite {column} value {token!r}")
    return value


@dataclass(frozen=True)
class FanData:
    """Suboptimality trajectories grouped into one curve per key.

    ``kind`` says what the keys are: quantile levels in [0, 1] or
    repetition indices.  ``curves[i, j]`` is the factor for ``keys[i]``
    after ``steps[j]`` refinement steps (``kn[j]`` weighted draws); +inf
    marks steps where the factor was unbounded.
    """

    kind: str
    steps: Array
    kn: Array
    keys: Array
    curves: Array

    @property
    def n_curves(self) -> int:
        return len(self.keys)

    def median_index(self) -> int | None:
        """Index of the central curve, if there is a single middle key."""
        if self.n_curves % 2 == 1:
            return self.n_curves // 2
        return None

    def band_pairs(self) -> list[tuple[int, int]]:
        """Symmetric (low, high) curve index pairs, outermost first.

        Repetition files carry individual trajectories, not a distribution
        summary, so they get no bands.
        """
        if self.kind != KIND_QUANTILES:
            return []
        return [(i, self.n_curves - 1 - i) for i in range(self.n_curves // 2)]


def load_fan(path) -> FanData:
    """Parse a refinement CSV (quantile or per-repetition schema)."""
    header, rows = _read_rows(path)
    if header == QUANTILE_HEADER:
        kind = KIND_QUANTILES
    elif header == REP_HEADER:
        kind = KIND_REPS
    else:
        raise SchemaError(
            f"{path}: header {list(header)} matches neither "
            f"{list(QUANTILE_HEADER)} nor {list(REP_HEADER)}"
        )
    if not rows:
        raise SchemaError(f"{path}: no data rows")

    kn_by_step: dict[int, float] = {}
    cells: dict[tuple[float, int], float] = {}
    for row in rows:
        if len(row) != 4:
            raise SchemaError(f"{path}: expected 4 columns, got {len(row)}")
        step = int(_parse_float(row[0], path, "step"))
        kn = _parse_float(row[1], path, "kn")
        key = _parse_float(row[2], path, header[2])
        gamma = _parse_float(row[3], path, "gamma", allow_inf=True)
        if step < 1 or kn <= 0.0:
            raise SchemaError(f"{path}: step/kn must be positive, got {row[:2]}")
        if kind == KIND_QUANTILES and not 0.0 <= key <= 1.0:
            raise SchemaError(f"{path}: quantile level {key} outside [0, 1]")
        if kn_by_step.setdefault(step, kn) != kn:
            raise SchemaError(f"{path}: step {step} listed with two kn values")
        if (key, step) in cells:
            raise SchemaError(f"{path}: duplicate row for {header[2]}={key}, step={step}")
        cells[(key, step)] = gamma

    steps = np.array(sorted(kn_by_step), dtype=int)
    keys = np.array(sorted({key for key, _ in cells}))
    curves = np.empty((len(keys), len(steps)))
    for i, key in enumerate(keys):
        for j, step in enumerate(steps):
            try:
                curves[i, j] = cells[(float(key), int(step))]
            except KeyError:
                raise SchemaError(
                    f"{path}: missing row for {header[2]}={key}, step={step}"
                ) from None
    kn = np.array([kn_by_step[int(s)] for s in steps])
    return FanData(kind, steps, kn, keys, curves)


def suboptimality_bound(kn, d: int, p: float):
    """Reference ceiling (sqrt(kn)+a)/(sqrt(kn)-a), a = sqrt((d-1)/(1-p)).

    Returns +inf wherever the denominator is nonpositive.  Scalar in,
    scalar out; array in, array out.
    """
    if not 0.0 < p < 1.0:
        raise SchemaError("bound probability p must lie strictly between 0 and 1")
    if d < 1:
        raise SchemaError("bound dimension d must be at least 1")
    kn_arr = np.asarray(kn, dtype=float)
    if np.any(kn_arr <= 0.0):
        raise SchemaError("bound needs positive kn values")
    alpha = math.sqrt((d - 1.0) / (1.0 - p))
    root = np.sqrt(kn_arr)
    with np.errstate(divide="ignore"):
        values = np.where(root > alpha, (root + alpha) / (root - alpha), np.inf)
    return float(values) if np.isscalar(kn) else values


@dataclass(frozen=True)
class LevelSetData:
    """A positive matrix over the unit square plus curves drawn on top.

    ``values[i, j]`` sits at ``(x[i], y[j])``; the y grid is the uniform
    unit-interval sampling implied by the column count.  ``overlay`` holds
    one column per curve named in ``overlay_names``, evaluated at ``x``.
    """

    x: Array
    y: Array
    values: Array
    overlay_names: tuple[str, ...]
    overlay: Array


def load_levelsets(matrix_path, overlay_path) -> LevelSetData:
    """Parse a level-set matrix CSV together with its overlay CSV."""
    header, rows = _read_rows(overlay_path)
    if len(header) < 2 or header[0] != "x" or header[1] != "f_true":
        raise SchemaError(
            f"{overlay_path}: overlay header must start with x,f_true, got {list(header)}"
        )
    table = np.empty((len(rows), len(header)))
    if not rows:
        raise SchemaError(f"{overlay_path}: no data rows")
    for i, row in enumerate(rows):
        if len(row) != len(header):
            raise SchemaError(f"{overlay_path}: row {i + 2} has {len(row)} columns")
        table[i] = [_parse_float(tok, overlay_path, header[j]) for j, tok in enumerate(row)]
    x = table[:, 0]
    if np.any(np.diff(x) <= 0.0):
        raise SchemaError(f"{overlay_path}: x column must be strictly increasing")

    raw = []
    try:
        with open(matrix_path, newline="") as fh:
            for i, row in enumerate(csv.reader(fh)):
                raw.append([_parse_float(tok, matrix_path, "matrix") for tok in row])
                if len(raw[-1]) != len(raw[0]):
                    raise SchemaError(f"{matrix_path}: ragged row {i + 1}")
    except OSError as exc:
        raise SchemaError(f"cannot read {matrix_path}: {exc}") from exc
    if not raw:
        raise SchemaError(f"{matrix_path}: empty file")
    values = np.array(raw)
    if values.ndim != 2 or values.shape[1] < 2:
        raise SchemaError(f"{matrix_path}: need a 2-D matrix, got shape {values.shape}")
    if np.any(values <= 0.0):
        raise SchemaError(f"{matrix_path}: matrix values must be positive")
    if values.shape[0] != len(x):
        raise SchemaError(
            f"{matrix_path}: matrix has {values.shape[0]} rows but the overlay has {len(x)}"
        )
    y = np.linspace(0.0, 1.0, values.shape[1])
    return LevelSetData(x, y, values, tuple(header[1:]), table[:, 1:])


@dataclass(frozen=True)
class ErrorCurves:
    """Relative errors of the reweighting study, grouped for display.

    ``rep_values[t, m, r, i]`` is the error of target ``targets[t]`` under
    method ``methods[m]`` in repetition ``r`` at sample count ``n[i]``;
    ``medians`` is its median over the repetition axis.
    """

    targets: tuple[str, ...]
    methods: tuple[str, ...]
    n: Array
    rep_values: Array
    medians: Array


def load_error_curves(path) -> ErrorCurves:
    """Parse a reweighting error table CSV."""
    header, rows = _read_rows(path)
    if header != ERROR_HEADER:
        raise SchemaError(f"{path}: header {list(header)} != {list(ERROR_HEADER)}")
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    cells: dict[tuple[str, str, int, int], float] = {}
    for row in rows:
        if len(row) != 5:
            raise SchemaError(f"{path}: expected 5 columns, got {len(row)}")
        target, n_tok, rep_tok, method = row[0], row[1], row[2], row[3]
        n = int(_parse_float(n_tok, path, "n"))
        rep = int(_parse_float(rep_tok, path, "rep"))
        err = _parse_float(row[4], path, "rel_error")
        if n < 1 or rep < 0 or err < 0.0:
            raise SchemaError(f"{path}: out-of-range row {row}")
        key = (target, method, rep, n)
        if key in cells:
            raise SchemaError(f"{path}: duplicate row for {key}")
        cells[key] = err

    targets = tuple(sorted({k[0] for k in cells}))
    methods = tuple(sorted({k[1] for k in cells}))
    reps = sorted({k[2] for k in cells})
    ns = np.array(sorted({k[3] for k in cells}), dtype=int)
    values = np.empty((len(targets), len(methods), len(reps), len(ns)))
    for t, target in enumerate(targets):
        for m, method in enumerate(methods):
            for r, rep in enumerate(reps):
                for i, n in enumerate(ns):
                    try:
                        values[t, m, r, i] = cells[(target, method, rep, int(n))]
                    except KeyError:
                        raise SchemaError(
                            f"{path}: missing row for {(target, method, rep, int(n))}"
                        ) from None
    return ErrorCurves(targets, methods, ns, values, np.median(values, axis=2))
