"""Tests for the discretized measures.

Known values
------------
* Uniform01 with 4 cells: nodes 1/8, 3/8, 5/8, 7/8, masses all 1/4.
* Second moment: 1 for the truncated Gaussian, 1/3 for UniformSym.
* Categorical cell probabilities for density(x) = x on Uniform01 with 8
  cells: p_i = node_i / 4 (equal cell masses, Sum node_i = 4).
"""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from christoffel_sampling.exceptions import (
    DegenerateDensity,
    InvalidShape,
    InvalidSpec,
    NumericalError,
)
from christoffel_sampling.measures import (
    GAUSSIAN,
    GRAPH_OF_F,
    KINDS,
    UNIFORM01,
    UNIFORM_SYM,
    build_measure,
)


class TestConstruction:
    def test_masses_sum_to_one(self):
        for kind in (GAUSSIAN, UNIFORM01, UNIFORM_SYM):
            meas = build_measure(kind, n_cells=501)
            assert_allclose(meas.cell_masses.sum(), 1.0, rtol=1e-12)

    def test_uniform01_four_cells(self):
        meas = build_measure(UNIFORM01, n_cells=4)
        assert_allclose(meas.nodes, [0.125, 0.375, 0.625, 0.875])
        assert_allclose(meas.cell_masses, [0.25, 0.25, 0.25, 0.25])
        assert_allclose(meas.edges, [0.0, 0.25, 0.5, 0.75, 1.0])

    def test_nodes_are_cell_midpoints(self):
        meas = build_measure(GAUSSIAN, n_cells=1000)
        assert_allclose(meas.nodes, (meas.edges[:-1] + meas.edges[1:]) / 2.0)

    def test_gaussian_symmetry(self):
        meas = build_measure(GAUSSIAN, n_cells=10_000)
        assert_allclose(meas.nodes, -meas.nodes[::-1], atol=1e-14)
        assert_allclose(meas.cell_masses, meas.cell_masses[::-1], atol=1e-15)

    def test_default_cell_counts(self):
        assert build_measure(GAUSSIAN).n_cells == 100_000
        assert build_measure(UNIFORM01).n_cells == 2**17

    def test_unknown_kind_rejected(self):
        with pytest.raises(InvalidSpec):
            build_measure("Lebesgue")

    def test_too_few_cells_rejected(self):
        with pytest.raises(InvalidSpec):
            build_measure(UNIFORM01, n_cells=1)

    def test_graph_measure_requires_lift(self):
        with pytest.raises(InvalidSpec):
            build_measure(GRAPH_OF_F)

    def test_kinds_registry(self):
        assert set(KINDS) == {GAUSSIAN, UNIFORM01, UNIFORM_SYM, GRAPH_OF_F}


class TestQuadrature:
    def test_gaussian_second_moment(self):
        meas = build_measure(GAUSSIAN)
        assert_allclose(meas.quadrature(lambda x: x**2), 1.0, rtol=1e-6)

    def test_uniform_sym_second_moment(self):
        meas = build_measure(UNIFORM_SYM)
        assert_allclose(meas.quadrature(lambda x: x**2), 1.0 / 3.0, rtol=1e-9)

    def test_accepts_precomputed_values(self):
        meas = build_measure(UNIFORM01, n_cells=16)
        values = meas.nodes**3
        assert_allclose(meas.quadrature(values), meas.quadrature(lambda x: x**3))

    def test_wrong_length_values_rejected(self):
        meas = build_measure(UNIFORM01, n_cells=16)
        with pytest.raises(InvalidShape):
            meas.quadrature(np.ones(15))

    def test_nonfinite_integrand_rejected(self):
        meas = build_measure(UNIFORM01, n_cells=16)
        bad = np.ones(16)
        bad[3] = np.inf
        with pytest.raises(NumericalError):
            meas.quadrature(bad)


class TestSampling:
    def test_sample_mean_matches_quadrature(self):
        # E[x^2] under the truncated Gaussian is 1; SE of the Monte Carlo
        # mean over 40_000 draws is sqrt(Var x^2)/200 = sqrt(2)/200.
        meas = build_measure(GAUSSIAN)
        rng = np.random.default_rng(11)
        x = meas.rho_sample(40_000, rng)
        se = np.sqrt(2.0) / 200.0
        assert abs(np.mean(x**2) - 1.0) <= 3 * se

    def test_cell_frequencies_chi_squared(self):
        # density(x) = x on Uniform01 with 8 cells: p_i = node_i / 4.
        # Chi-squared with 7 dof; 24.32 is the 99.9% point.
        meas = build_measure(UNIFORM01, n_cells=8)
        rng = np.random.default_rng(5)
        draws = meas.sample(meas.nodes.copy(), 20_000, rng)
        counts = np.histogram(draws, bins=meas.edges)[0]
        expected = 20_000 * meas.nodes / 4.0
        chi2 = np.sum((counts - expected) ** 2 / expected)
        assert chi2 < 24.32

    def test_samples_stay_inside_support(self):
        meas = build_measure(UNIFORM_SYM, n_cells=64)
        rng = np.random.default_rng(0)
        x = meas.sample(np.ones(64), 1000, rng)
        assert np.all(x >= -1.0) and np.all(x <= 1.0)

    def test_consumes_exactly_two_uniform_batches(self):
        meas = build_measure(UNIFORM01, n_cells=32)
        rng = np.random.default_rng(123)
        meas.sample(np.ones(32), 17, rng)
        ref = np.random.default_rng(123)
        ref.random(17)
        ref.random(17)
        assert rng.random() == ref.random()

    def test_rho_sample_deterministic(self):
        meas = build_measure(GAUSSIAN, n_cells=1000)
        a = meas.rho_sample(50, np.random.default_rng(9))
        b = meas.rho_sample(50, np.random.default_rng(9))
        assert_allclose(a, b)

    def test_zero_density_rejected(self):
        meas = build_measure(UNIFORM01, n_cells=8)
        with pytest.raises(DegenerateDensity):
            meas.sample(np.zeros(8), 10, np.random.default_rng(0))

    def test_negative_density_rejected(self):
        meas = build_measure(UNIFORM01, n_cells=8)
        with pytest.raises(InvalidSpec):
            meas.sample(np.full(8, -1.0), 10, np.random.default_rng(0))

    def test_wrong_length_density_rejected(self):
        meas = build_measure(UNIFORM01, n_cells=8)
        with pytest.raises(InvalidShape):
            meas.sample(np.ones(9), 10, np.random.default_rng(0))


class TestGraphMeasure:
    def test_points_follow_lift_exactly(self):
        meas = build_measure(GRAPH_OF_F, n_cells=100, params={"lift": lambda x: x**2})
        pts = meas.points()
        assert pts.shape == (100, 2)
        assert_allclose(pts[:, 1], pts[:, 0] ** 2, rtol=1e-15)

    def test_samples_lie_on_graph(self):
        meas = build_measure(GRAPH_OF_F, n_cells=64, params={"lift": np.sin})
        rng = np.random.default_rng(3)
        pts = meas.sample(np.ones(64), 200, rng)
        assert pts.shape == (200, 2)
        assert_allclose(pts[:, 1], np.sin(pts[:, 0]), rtol=1e-15)

    def test_quadrature_sees_lifted_points(self):
        meas = build_measure(GRAPH_OF_F, n_cells=2**14, params={"lift": lambda x: x**2})
        val = meas.quadrature(lambda p: p[:, 0] + p[:, 1])
        assert_allclose(val, 0.5 + 1.0 / 3.0, rtol=1e-8)
