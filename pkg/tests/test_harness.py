"""Tests for the experiment harness and the CLI.

The external contract under test: CSV schemas, manifest contents, and the
reproducibility guarantees (byte-identical reruns, worker-count
independence, manifest config round-trip).
"""

import csv
import json
import math

import numpy as np
import pytest

from christoffel_sampling.cli import main
from christoffel_sampling.dictionaries import HERMITE, RANDOM_MIXED
from christoffel_sampling.exceptions import ConfigError
from christoffel_sampling.harness import (
    ExperimentSpec,
    format_float,
    load_config,
    record_steps,
    run_experiment,
    spec_from_dict,
    validate_spec,
)
from christoffel_sampling.measures import GAUSSIAN
from christoffel_sampling.presets import PRESET_NAMES, oversampled_n, preset_specs
from christoffel_sampling.refinement import MODE_EXACT


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


class TestRecordSteps:
    def test_log_spacing(self):
        assert record_steps(100) == list(range(1, 10)) + [10, 20, 30, 40, 50, 60, 70, 80, 90, 100]

    def test_k_max_always_kept(self):
        assert record_steps(11)[-1] == 11
        assert record_steps(1) == [1]
        assert 345 in record_steps(345)

    def test_stride(self):
        assert record_steps(17, record_every=5) == [1, 6, 11, 16, 17]
        assert record_steps(4, record_every=1) == [1, 2, 3, 4]


class TestFormatFloat:
    def test_round_trip(self):
        for x in (1.0 / 3.0, 0.1, 7.25, 1e-300, 123456.789012345678, 2.0**-52):
            assert float(format_float(x)) == x

    def test_infinity(self):
        assert format_float(np.inf) == "inf"
        assert math.isinf(float(format_float(np.inf)))

    def test_integers_stay_short(self):
        assert format_float(2.0) == "2"


class TestSpecParsing:
    def test_minimal_spec(self):
        spec = spec_from_dict({"id": "w", "kind": "weighted-ls"})
        assert spec.repetitions == 10 and spec.seed == 0

    def test_unknown_field_rejected(self):
        with pytest.raises(ConfigError, match="unknown spec fields"):
            spec_from_dict({"id": "w", "kind": "weighted-ls", "bogus": 1})

    def test_missing_id_rejected(self):
        with pytest.raises(ConfigError, match="id"):
            spec_from_dict({"kind": "weighted-ls"})

    def test_n_grid_becomes_tuple(self):
        spec = spec_from_dict({"id": "w", "kind": "weighted-ls", "n_grid": [10, 20]})
        assert spec.n_grid == (10, 20)

    def test_validation_errors(self):
        base = dict(id="x", kind="weighted-ls")
        bad = [
            dict(base, id="a/b"),
            dict(base, id=""),
            dict(base, kind="nope"),
            dict(base, repetitions=0),
            dict(base, seed=-1),
            dict(base, record_every=0),
            {"id": "r", "kind": "refinement"},  # no dictionary/measure
        ]
        for raw in bad:
            with pytest.raises(ConfigError):
                spec_from_dict(raw)

    def test_non_object_entry_rejected(self):
        with pytest.raises(ConfigError):
            spec_from_dict(["id", "x"])


class TestLoadConfig:
    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            load_config(tmp_path / "nope.json")

    def test_invalid_json(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{not json")
        with pytest.raises(ConfigError, match="invalid JSON"):
            load_config(p)

    def test_single_object(self, tmp_path):
        p = tmp_path / "one.json"
        p.write_text(json.dumps({"id": "w", "kind": "weighted-ls"}))
        specs = load_config(p)
        assert [s.id for s in specs] == ["w"]

    def test_experiments_list(self, tmp_path):
        p = tmp_path / "many.json"
        p.write_text(
            json.dumps(
                {
                    "experiments": [
                        {"id": "a", "kind": "weighted-ls"},
                        {"id": "b", "kind": "cd", "k_max": 3},
                    ]
                }
            )
        )
        assert [s.id for s in load_config(p)] == ["a", "b"]

    def test_empty_list(self, tmp_path):
        p = tmp_path / "empty.json"
        p.write_text("[]")
        with pytest.raises(ConfigError):
            load_config(p)


def hermite_spec(**overrides):
    base = dict(
        id="t",
        kind="refinement",
        dictionary={"family": HERMITE, "dimension": 4},
        measure={"kind": GAUSSIAN},
        mode=MODE_EXACT,
        n=2,
        k_max=30,
        repetitions=3,
        seed=5,
    )
    base.update(overrides)
    return ExperimentSpec(**base)


class TestRefinementExperiment:
    def test_outputs(self, tmp_path):
        spec = hermite_spec()
        summary = run_experiment(spec, tmp_path)
        steps = record_steps(30)

        reps = read_csv(tmp_path / "t_reps.csv")
        assert reps[0] == ["step", "kn", "rep", "gamma"]
        assert len(reps) == 1 + 3 * len(steps)
        for row in reps[1:]:
            k, kn, rep, gamma = int(row[0]), int(row[1]), int(row[2]), float(row[3])
            assert kn == 2 * k and k in steps and rep in (0, 1, 2)
            assert gamma >= 1.0 or math.isinf(gamma)

        quant = read_csv(tmp_path / "t_quantiles.csv")
        assert quant[0] == ["step", "kn", "level", "gamma"]
        assert len(quant) == 1 + 11 * len(steps)
        levels = sorted({float(r[2]) for r in quant[1:]})
        np.testing.assert_allclose(levels, np.linspace(0.0, 1.0, 11))

        manifest = json.loads((tmp_path / "t_manifest.json").read_text())
        assert manifest["kind"] == "refinement"
        assert manifest["dimension"] == 4 and manifest["rank"] == 4
        assert manifest["p"] == 0.75
        assert manifest["files"] == {"reps": "t_reps.csv", "quantiles": "t_quantiles.csv"}
        assert summary["finite_final"] <= 3

    def test_manifest_config_round_trips(self, tmp_path):
        spec = hermite_spec()
        run_experiment(spec, tmp_path)
        manifest = json.loads((tmp_path / "t_manifest.json").read_text())
        assert spec_from_dict(manifest["config"]) == spec

    def test_identical_bytes_across_runs(self, tmp_path):
        spec = hermite_spec(id="d", k_max=200, n=1, repetitions=2, seed=9)
        a, b = tmp_path / "a", tmp_path / "b"
        run_experiment(spec, a)
        run_experiment(spec, b)
        for name in ("d_reps.csv", "d_quantiles.csv"):
            assert (a / name).read_bytes() == (b / name).read_bytes()

    def test_worker_count_does_not_change_results(self, tmp_path):
        spec = ExperimentSpec(
            id="rm",
            kind="refinement",
            dictionary={"family": RANDOM_MIXED, "dimension": 16, "base_dimension": 8},
            measure={"kind": GAUSSIAN},
            mode=MODE_EXACT,
            n=1,
            k_max=20,
            repetitions=2,
            seed=3,
        )
        a, b = tmp_path / "a", tmp_path / "b"
        run_experiment(spec, a, jobs=1)
        run_experiment(spec, b, jobs=2)
        assert (a / "rm_reps.csv").read_bytes() == (b / "rm_reps.csv").read_bytes()


class TestCDExperiment:
    def test_outputs(self, tmp_path):
        spec = ExperimentSpec(
            id="cdt", kind="cd", degree=3, n=1, k_max=3, repetitions=2, seed=1
        )
        run_experiment(spec, tmp_path)

        overlay = read_csv(tmp_path / "cdt.csv")
        assert overlay[0] == ["x", "f_true", "f_d_exact", "f_d_refined"]
        assert len(overlay) == 1 + 201
        xs = np.array([float(r[0]) for r in overlay[1:]])
        assert xs[0] == 0.0 and xs[-1] == 1.0 and np.all(np.diff(xs) > 0)
        for col in (1, 2, 3):
            vals = np.array([float(r[col]) for r in overlay[1:]])
            assert np.all(np.isfinite(vals))
            assert vals.min() >= -0.5 and vals.max() <= 1.5

        kgrid = read_csv(tmp_path / "cdt_kgrid.csv")
        assert len(kgrid) == 201 and len(kgrid[0]) == 1001
        sample = np.array([[float(v) for v in row] for row in kgrid[:5]])
        assert np.all(sample > 0.0)

        manifest = json.loads((tmp_path / "cdt_manifest.json").read_text())
        assert manifest["dimension"] == 9
        assert 0.0 <= manifest["exact_error"] <= 0.5
        assert len(manifest["refined_errors"]) == 2
        assert len(manifest["refined_gammas"]) == 2


class TestWeightedLSExperiment:
    def test_outputs(self, tmp_path):
        spec = ExperimentSpec(
            id="wt", kind="weighted-ls", n_grid=(10, 14), repetitions=2, seed=3
        )
        run_experiment(spec, tmp_path)
        rows = read_csv(tmp_path / "wt.csv")
        assert rows[0] == ["target", "n", "rep", "method", "rel_error"]
        assert len(rows) == 1 + 2 * 2 * 4 * 2
        assert {r[3] for r in rows[1:]} == {"naive", "optimal"}
        assert {r[0] for r in rows[1:]} == {"sin2pi", "runge", "invsq", "indicator"}
        for r in rows[1:]:
            assert float(r[4]) >= 0.0
        manifest = json.loads((tmp_path / "wt_manifest.json").read_text())
        assert manifest["files"] == {"errors": "wt.csv"}


class TestPresets:
    def test_names_and_ids(self):
        assert len(PRESET_NAMES) == 8
        ids = [s.id for s in preset_specs("hermite")]
        assert ids == [
            "hermite-n1-exact",
            "hermite-n1-naive",
            "hermite-n111-exact",
            "hermite-n111-naive",
        ]
        est = [s.id for s in preset_specs("step-estimated")]
        assert est[0] == "step-est-m1-zero" and est[-1] == "step-est-naive"
        assert len(est) == 7

    def test_oversampled_n(self):
        assert oversampled_n(8) == 111
        assert oversampled_n(16) == 267
        assert oversampled_n(18) == 308

    def test_specs_validate(self):
        for name in PRESET_NAMES:
            for spec in preset_specs(name):
                validate_spec(spec)

    def test_unknown_preset(self):
        with pytest.raises(ConfigError):
            preset_specs("nope")


class TestCLI:
    def test_no_args_prints_usage(self, capsys):
        assert main([]) == 1
        assert "usage" in capsys.readouterr().out

    def test_help(self, capsys):
        assert main(["help"]) == 0
        assert "commands" in capsys.readouterr().out

    def test_bound_exact_value(self, capsys):
        assert main(["bound", "--d", "8", "--p", "0.75", "--kn", "112"]) == 0
        assert capsys.readouterr().out.strip() == "3.0"

    def test_bound_dimension_one(self, capsys):
        assert main(["bound", "--d", "1", "--p", "0.5", "--kn", "5"]) == 0
        assert capsys.readouterr().out.strip() == "1.0"

    def test_run_missing_config(self, capsys):
        assert main(["run", "/nonexistent/config.json"]) == 1
        assert capsys.readouterr().err.startswith("error:")

    def test_unknown_command(self, capsys):
        assert main(["frobnicate"]) == 1
        assert "unknown command" in capsys.readouterr().err

    def test_list_presets(self, capsys):
        assert main(["list-presets"]) == 0
        out = capsys.readouterr().out
        for name in PRESET_NAMES:
            assert name in out
        assert "hermite-n1-exact" in out

    def test_unknown_preset_exits_one(self, capsys):
        assert main(["preset", "nope", "--out", "/tmp/unused"]) == 1
        assert capsys.readouterr().err.startswith("error:")

    def test_run_end_to_end_with_overrides(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(
            json.dumps(
                {
                    "id": "mini",
                    "kind": "refinement",
                    "dictionary": {"family": HERMITE, "dimension": 3},
                    "measure": {"kind": GAUSSIAN},
                    "n": 2,
                    "k_max": 10,
                }
            )
        )
        out = tmp_path / "results"
        code = main(
            ["run", str(cfg), "--out", str(out), "--reps", "2", "--seed", "11"]
        )
        assert code == 0
        manifest = json.loads((out / "mini_manifest.json").read_text())
        assert manifest["config"]["repetitions"] == 2
        assert manifest["config"]["seed"] == 11
        assert (out / "mini_reps.csv").is_file()
        assert "wrote" in capsys.readouterr().out
