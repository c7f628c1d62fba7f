"""Renderer tests on the returned plot arrays plus light PNG checks."""

import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from christoffel_figures.plotdata import load_error_curves, load_fan, load_levelsets
from christoffel_figures.render import render_cd, render_errors, render_fan

PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"


def assert_is_png(path):
    blob = path.read_bytes()
    assert blob[:8] == PNG_SIGNATURE
    assert len(blob) > 1024


class TestFanRender:
    def test_quantile_fan_with_bound(self, study_dir, tmp_path):
        manifest = json.loads(
            (study_dir / "hermite" / "hermite-n1-exact_manifest.json").read_text()
        )
        fan = load_fan(study_dir / "hermite" / "hermite-n1-exact_quantiles.csv")
        out = tmp_path / "fan.png"
        drawn = render_fan(fan, out, bound=(manifest["rank"], manifest["p"]))
        assert_is_png(out)
        assert drawn.band_count == 5
        assert drawn.clipped.shape == fan.curves.shape
        # clipping replaces exactly the unbounded entries with the ceiling
        assert np.array_equal(drawn.clipped, ~np.isfinite(fan.curves))
        assert drawn.ceiling == 1.5 * fan.curves[np.isfinite(fan.curves)].max()
        assert np.all(drawn.curves[drawn.clipped] == drawn.ceiling)
        finite = np.isfinite(fan.curves)
        assert_allclose(drawn.curves[finite], fan.curves[finite], rtol=0)
        # the reference curve follows the manifest parameters
        assert drawn.bound is not None
        assert drawn.bound[-1] == pytest.approx(
            (100.0 + np.sqrt(28)) / (100.0 - np.sqrt(28)), rel=1e-12
        )

    def test_single_rep_draws_one_line_no_band(self, tmp_path):
        csv_path = tmp_path / "single.csv"
        csv_path.write_text(
            "step,kn,rep,gamma\n"
            "1,2,0,inf\n10,20,0,4\n100,200,0,2\n1000,2000,0,1.5\n"
        )
        fan = load_fan(csv_path)
        out = tmp_path / "single.png"
        drawn = render_fan(fan, out)
        assert_is_png(out)
        assert fan.n_curves == 1
        assert drawn.band_count == 0
        assert drawn.bound is None
        assert drawn.clipped.sum() == 1
        assert drawn.curves[0, 0] == drawn.ceiling == 1.5 * 4.0

    def test_deterministic_bytes(self, study_dir, tmp_path):
        fan = load_fan(study_dir / "hermite" / "hermite-n1-naive_quantiles.csv")
        a, b = tmp_path / "a.png", tmp_path / "b.png"
        render_fan(fan, a)
        render_fan(fan, b)
        assert a.read_bytes() == b.read_bytes()


class TestCDRender:
    def test_full_levelsets(self, study_dir, tmp_path):
        data = load_levelsets(
            study_dir / "cd" / "cd_kgrid.csv", study_dir / "cd" / "cd.csv"
        )
        out = tmp_path / "cd.png"
        drawn = render_cd(data, out)
        assert_is_png(out)
        assert len(drawn.contour_levels) == 13
        assert drawn.contour_levels[0] == pytest.approx(np.log10(data.values.min()))
        assert drawn.contour_levels[-1] == pytest.approx(np.log10(data.values.max()))
        assert drawn.overlay_names == ("f_true", "f_d_exact", "f_d_refined")

    def test_constant_matrix_uniform_background(self, tmp_path):
        overlay = tmp_path / "o.csv"
        overlay.write_text("x,f_true\n0,0.2\n0.5,0.5\n1,0.8\n")
        matrix = tmp_path / "m.csv"
        matrix.write_text("7,7,7,7\n7,7,7,7\n7,7,7,7\n")
        data = load_levelsets(matrix, overlay)
        out = tmp_path / "flat.png"
        drawn = render_cd(data, out)
        assert_is_png(out)
        # a single band spanning the constant level: uniform background
        assert len(drawn.contour_levels) == 2
        assert drawn.contour_levels[0] < np.log10(7.0) < drawn.contour_levels[1]

    def test_deterministic_bytes(self, study_dir, tmp_path):
        data = load_levelsets(
            study_dir / "cd" / "cd_kgrid.csv", study_dir / "cd" / "cd.csv"
        )
        a, b = tmp_path / "a.png", tmp_path / "b.png"
        render_cd(data, a)
        render_cd(data, b)
        assert a.read_bytes() == b.read_bytes()


class TestErrorRender:
    def test_curves_drawn_match_loader(self, study_dir, tmp_path):
        curves = load_error_curves(study_dir / "wls" / "weighted-ls.csv")
        out = tmp_path / "errors.png"
        drawn = render_errors(curves, out)
        assert_is_png(out)
        assert drawn.targets == curves.targets
        assert drawn.methods == curves.methods
        assert_allclose(drawn.medians, curves.medians, rtol=0)
        assert drawn.n.tolist() == curves.n.tolist()
