"""Tests for the singular systems of the Volterra, heat and Radon operators."""

import math

import numpy as np
import pytest
from scipy import stats

from src.errors import ParameterError
from src.spectral.measures import basis_gram, integrate, orthonormality_defect
from src.spectral.model import IllposednessKind, SeriesFunction, eval_series, forward_map
from src.spectral.operators import (
    build_operator,
    heat,
    radon_indices,
    sample_design,
    zernike_radial,
)


class TestVolterra:
    def test_singular_values(self, volterra_op):
        kappas = volterra_op.kappas(3)
        assert kappas[0] == pytest.approx(2.0 / math.pi)
        assert kappas[2] == pytest.approx(1.0 / (2.5 * math.pi))

    def test_integral_of_first_function(self, volterra_op):
        expected = 2.0 * math.sqrt(2.0) / math.pi
        image = volterra_op.apply_formula(lambda t: volterra_op.e_basis(1, t), np.array([1.0]))
        assert image[0] == pytest.approx(expected, abs=1e-12)
        assert volterra_op.kappas(1)[0] * volterra_op.g_basis(1, 1.0)[0] == pytest.approx(expected)

    def test_mild_degree_one(self, volterra_op):
        assert volterra_op.illposedness.kind is IllposednessKind.MILD
        assert volterra_op.illposedness.p == 1.0


class TestHeat:
    def test_singular_values(self, heat_op):
        kappas = heat_op.kappas(3)
        assert kappas[0] == pytest.approx(0.90602, abs=1e-5)
        assert kappas[2] == pytest.approx(0.41124, abs=1e-5)

    def test_severe_constants(self, heat_op):
        ill = heat_op.illposedness
        assert ill.kind is IllposednessKind.SEVERE
        assert ill.c == pytest.approx(math.pi**2 * 0.01)
        assert ill.p == 2.0

    @pytest.mark.parametrize("T", [0.0, -0.5])
    def test_non_positive_time(self, T):
        with pytest.raises(ParameterError):
            heat(T)

    def test_solution_vanishes_at_node(self, heat_op):
        image = forward_map(SeriesFunction([0.0, 1.0]), heat_op)
        assert eval_series(image, heat_op.g_basis, 0.5) == pytest.approx(0.0, abs=1e-12)


class TestRadon:
    @pytest.mark.parametrize(
        "j, m, l",
        [(1, 0, 0), (2, 1, -1), (3, 1, 1), (4, 2, -2), (5, 2, 0), (6, 2, 2), (7, 3, -3)],
    )
    def test_indices(self, j, m, l):
        mj, lj = radon_indices(np.array([j]))
        assert (int(mj[0]), int(lj[0])) == (m, l)

    def test_index_map_is_admissible(self):
        m, l = radon_indices(np.arange(1, 2001))
        assert np.all(np.abs(l) <= m)
        assert np.all((m - l) % 2 == 0)
        # every (m, l) pair appears exactly once
        assert len(set(zip(m.tolist(), l.tolist()))) == 2000

    def test_first_function(self, radon_op):
        points = np.array([[0.0, 0.0], [0.3, 1.0], [0.9, 5.0]])
        assert radon_op.kappas(1)[0] == 1.0
        np.testing.assert_allclose(radon_op.e_basis(1, points), 1.0)

    def test_chebyshev_base_case(self, radon_op):
        points = np.column_stack([np.cos(np.linspace(0, 1.5, 7)), np.zeros(7)])
        np.testing.assert_allclose(radon_op.g_basis(1, points), 1.0)

    def test_zernike_at_rim(self):
        m = np.array([0, 2, 4, 3])
        k = np.array([0, 0, 2, 1])
        np.testing.assert_allclose(zernike_radial(m, k, np.ones(4)), 1.0)

    def test_zernike_closed_form(self):
        r = np.linspace(0.0, 1.0, 9)
        np.testing.assert_allclose(zernike_radial(2, 0, r), 2 * r**2 - 1, atol=1e-14)
        np.testing.assert_allclose(zernike_radial(4, 0, r), 6 * r**4 - 6 * r**2 + 1, atol=1e-14)
        np.testing.assert_allclose(zernike_radial(3, 1, r), 3 * r**3 - 2 * r, atol=1e-14)

    def test_second_and_third_orthogonal(self, radon_op):
        gram = basis_gram(radon_op.e_basis, radon_op.parameter_measure, 3)
        assert abs(gram[1, 2]) < 1e-8

    def test_mild_quarter_degree(self, radon_op):
        assert radon_op.illposedness.p == 0.25
        j = np.arange(1, 2001)
        normalized = radon_op.illposedness.normalized(j, radon_op.kappas(2000))
        assert normalized.min() > 0.5
        assert normalized.max() < 1.2


class TestSingularSystems:
    def test_orthonormal_bases(self, any_op):
        assert orthonormality_defect(any_op.e_basis, any_op.parameter_measure, 30) < 1e-6
        assert orthonormality_defect(any_op.g_basis, any_op.design_measure, 30) < 1e-6

    def test_measures_are_probabilities(self, any_op):
        for measure in (any_op.parameter_measure, any_op.design_measure):
            total = integrate(measure, lambda p: np.ones(len(p)), 4)
            assert total == pytest.approx(1.0, abs=1e-12)

    def test_defining_formula_matches_svd(self, any_op):
        points = sample_design(any_op, 50, seed=5)
        kappas = any_op.kappas(10)
        for j in range(1, 11):
            image = any_op.apply_formula(lambda t, j=j: any_op.e_basis(j, t), points)
            np.testing.assert_allclose(image, kappas[j - 1] * any_op.g_basis(j, points), atol=1e-5)

    def test_singular_values_nonincreasing(self, any_op):
        kappas = any_op.kappas(50)
        assert np.all(kappas > 0)
        assert np.all(np.diff(kappas) <= 0)

    def test_build_operator_by_name(self):
        assert build_operator("heat", T=0.05).parameters["T"] == 0.05
        with pytest.raises(ValueError):
            build_operator("deconvolution")


class TestSampleDesign:
    def test_volterra_range(self, volterra_op):
        x = sample_design(volterra_op, 3, seed=42)
        assert x.shape == (3,)
        assert np.all((x >= 0.0) & (x < 1.0))

    def test_deterministic(self, radon_op):
        first = sample_design(radon_op, 20, 9)
        np.testing.assert_array_equal(first, sample_design(radon_op, 20, 9))
        assert not np.array_equal(first, sample_design(radon_op, 20, 10))

    def test_needs_a_point(self, volterra_op):
        with pytest.raises(ParameterError):
            sample_design(volterra_op, 0, seed=0)

    def test_radon_mean_offset(self, radon_op):
        s = sample_design(radon_op, 1000, seed=1)[:, 0]
        expected = 4.0 / (3.0 * math.pi)
        stderr = s.std(ddof=1) / math.sqrt(len(s))
        assert abs(s.mean() - expected) < 3.0 * stderr

    def test_radon_line_distribution(self, radon_op):
        samples = sample_design(radon_op, 10_000, seed=2)
        s, phi = samples[:, 0], samples[:, 1]
        assert np.all((s >= 0) & (s <= 1) & (phi >= 0) & (phi < 2 * math.pi))

        def cdf(v):
            return 2.0 / math.pi * (v * np.sqrt(1.0 - v**2) + np.arcsin(v))

        edges = np.linspace(0.0, 1.0, 21)
        observed, _ = np.histogram(s, bins=edges)
        expected = len(s) * np.diff(cdf(edges))
        assert stats.chisquare(observed, expected).pvalue > 0.01
