"""Tests for the Gram matrix, the exact posterior and the marginal likelihood."""

import logging
import math

import numpy as np
import pytest

from src.errors import ContractError, NumericalError, ParameterError
from src.gp.exact import (
    Dataset,
    PosteriorKind,
    build_gram,
    exact_posterior,
    log_marginal_likelihood,
    robust_cholesky,
)
from src.gp.kernels import ForwardPriorKernel
from src.spectral.model import PriorSpectrum


def zero_kernel(op, truncation=5):
    prior = PriorSpectrum.polynomial(1.0, truncation)
    return prior, ForwardPriorKernel(op, prior, eigenvalues=np.zeros(truncation))


class TestDataset:
    def test_arrays_are_read_only(self):
        data = Dataset([0.1, 0.2], [1.0, 2.0])
        with pytest.raises(ValueError):
            data.y[0] = 5.0

    def test_length_mismatch(self):
        with pytest.raises(ContractError):
            Dataset([0.1, 0.2], [1.0])

    def test_negative_noise(self):
        with pytest.raises(ParameterError):
            Dataset([0.1], [1.0], sigma2=-1.0)

    def test_noise_free_data_cannot_be_fitted(self, volterra_op):
        data = Dataset([0.1], [1.0], sigma2=0.0)
        with pytest.raises(ParameterError):
            build_gram(volterra_op, PriorSpectrum.polynomial(1.0, 5), data)

    def test_subset_and_permutation(self):
        data = Dataset([0.1, 0.2, 0.3], [1.0, 2.0, 3.0], sigma2=0.5, seed=4)
        assert data.subset(2).n == 2
        permuted = data.permuted([2, 0, 1])
        np.testing.assert_array_equal(permuted.y, [3.0, 1.0, 2.0])
        assert permuted.sigma2 == 0.5


class TestBuildGram:
    def test_single_mode_kernel_at_one(self, volterra_op):
        prior = PriorSpectrum.polynomial(1.0, 5)
        kernel = ForwardPriorKernel(volterra_op, prior, eigenvalues=[1.0, 0, 0, 0, 0])
        gram = build_gram(volterra_op, prior, Dataset([1.0], [0.0]), kernel=kernel)
        assert gram.K_ff[0, 0] == pytest.approx(8.0 / math.pi**2, rel=1e-12)

    def test_zero_prior_gives_zero_gram(self, volterra_op):
        prior, kernel = zero_kernel(volterra_op)
        gram = build_gram(volterra_op, prior, Dataset([0.2, 0.7], [0.0, 0.0]), kernel=kernel)
        np.testing.assert_array_equal(gram.K_ff, 0.0)
        np.testing.assert_allclose(gram.chol, np.eye(2))

    def test_exactly_symmetric(self, any_op, make_problem):
        prior, _, data = make_problem(any_op, 40)
        gram = build_gram(any_op, prior, data)
        assert np.array_equal(gram.K_ff, gram.K_ff.T)

    def test_matches_kernel_series(self, volterra_op, make_problem):
        prior, _, data = make_problem(volterra_op, 6, truncation=8)
        gram = build_gram(volterra_op, prior, data)
        j = np.arange(1, 9)
        kappa = 1.0 / ((j - 0.5) * math.pi)
        g = math.sqrt(2.0) * np.sin(np.outer(data.x, (j - 0.5) * math.pi))
        expected = (g * prior.eigenvalues * kappa**2) @ g.T
        np.testing.assert_allclose(gram.K_ff, expected, rtol=1e-12, atol=1e-15)

    def test_wrong_eigenvalue_count(self, volterra_op):
        with pytest.raises(ContractError):
            ForwardPriorKernel(volterra_op, PriorSpectrum.polynomial(1.0, 5), eigenvalues=[1.0])


class TestRobustCholesky:
    def test_positive_definite_needs_no_jitter(self):
        factor, jitter = robust_cholesky(np.array([[2.0, 1.0], [1.0, 2.0]]))
        assert jitter == 0.0
        np.testing.assert_allclose(factor @ factor.T, [[2.0, 1.0], [1.0, 2.0]])

    def test_singular_matrix_gets_jitter(self, caplog):
        with caplog.at_level(logging.WARNING):
            factor, jitter = robust_cholesky(np.ones((3, 3)))
        assert jitter == pytest.approx(1e-10)
        assert np.all(np.isfinite(factor))
        assert "jitter" in caplog.text

    def test_indefinite_matrix_fails_with_diagnostics(self):
        with pytest.raises(NumericalError) as info:
            robust_cholesky(np.diag([1.0, -1.0]))
        assert info.value.diagnostics["min_eigenvalue"] == pytest.approx(-1.0)


class TestExactPosterior:
    def test_scalar_oracle(self, volterra_op):
        prior = PriorSpectrum.polynomial(1.0, 1)
        data = Dataset([0.3], [1.7])
        post = exact_posterior(volterra_op, prior, data)
        lam = 1.0
        kappa = 2.0 / math.pi
        g = math.sqrt(2.0) * math.sin(0.5 * math.pi * 0.3)
        expected = lam * kappa * g * 1.7 / (lam * kappa**2 * g**2 + 1.0)
        assert post.mean.coeffs[0] == pytest.approx(expected, rel=1e-12)
        assert post.kind is PosteriorKind.EXACT
        assert post.label == "exact"

    def test_zero_observations(self, heat_op, make_problem):
        prior, _, data = make_problem(heat_op, 30)
        data = Dataset(data.x, np.zeros(data.n))
        post = exact_posterior(heat_op, prior, data)
        np.testing.assert_array_equal(post.mean.coeffs, 0.0)
        t = np.linspace(0.0, 1.0, 25)
        prior_var = ForwardPriorKernel(heat_op, prior).prior_var(t)
        assert np.all(post.variance_at(t) <= prior_var + 1e-12)

    def test_huge_noise_returns_prior(self, volterra_op, make_problem):
        prior, _, data = make_problem(volterra_op, 30)
        informative = exact_posterior(volterra_op, prior, data).mean.coeffs
        noisy = Dataset(data.x, data.y, sigma2=1e12)
        vague = exact_posterior(volterra_op, prior, noisy).mean.coeffs
        assert np.linalg.norm(vague) <= 1e-6 * np.linalg.norm(informative)

    def test_coefficient_and_matrix_paths_agree(self, any_op, make_problem):
        prior, _, data = make_problem(any_op, 25)
        gram = build_gram(any_op, prior, data)
        post = exact_posterior(any_op, prior, data, gram)
        t = any_op.parameter_measure.sample(20, np.random.default_rng(7))
        s = any_op.parameter_measure.sample(20, np.random.default_rng(8))
        kernel = gram.kernel

        cross_t = kernel.cross_cov(t, data.x)
        cross_s = kernel.cross_cov(s, data.x)
        mean = cross_t @ gram.solve(data.y)
        cov = kernel.prior_cov(t, s) - cross_t @ gram.solve(cross_s.T)

        np.testing.assert_allclose(post.mean_at(t), mean, rtol=1e-9, atol=1e-12)
        np.testing.assert_allclose(post.cov_eval(t, s), cov, rtol=1e-9, atol=1e-12)
        np.testing.assert_allclose(post.variance_at(t), np.diag(post.cov_eval(t, t)), atol=1e-12)

    def test_covariance_is_psd(self, any_op, make_problem):
        prior, _, data = make_problem(any_op, 40)
        post = exact_posterior(any_op, prior, data)
        grid = any_op.e_basis.domain.grid(60)
        cov = post.cov_eval(grid, grid)
        np.testing.assert_allclose(cov, cov.T, atol=1e-12)
        assert np.linalg.eigvalsh(cov).min() >= -1e-8 * np.trace(cov)

    def test_variance_between_zero_and_prior(self, volterra_op, make_problem):
        prior, _, data = make_problem(volterra_op, 50)
        post = exact_posterior(volterra_op, prior, data)
        t = np.linspace(0.0, 1.0, 101)
        variance = post.variance_at(t)
        assert np.all(variance >= -1e-12)
        assert np.all(variance <= ForwardPriorKernel(volterra_op, prior).prior_var(t) + 1e-12)
        assert post.variance_mass() == pytest.approx(np.trace(post.coefficient_covariance()))

    def test_permutation_invariance(self, radon_op, make_problem):
        prior, _, data = make_problem(radon_op, 30)
        order = np.random.default_rng(1).permutation(data.n)
        post = exact_posterior(radon_op, prior, data)
        shuffled = exact_posterior(radon_op, prior, data.permuted(order))
        t = radon_op.e_basis.domain.grid(16)
        np.testing.assert_allclose(post.mean_at(t), shuffled.mean_at(t), atol=1e-10)
        np.testing.assert_allclose(post.variance_at(t), shuffled.variance_at(t), atol=1e-10)

    def test_more_data_never_adds_variance(self, volterra_op, make_problem):
        prior, _, data = make_problem(volterra_op, 21)
        t = np.linspace(0.0, 1.0, 50)
        before = exact_posterior(volterra_op, prior, data.subset(20)).variance_at(t)
        after = exact_posterior(volterra_op, prior, data).variance_at(t)
        assert np.all(after <= before + 1e-10)

    def test_samples_have_posterior_moments(self, volterra_op, make_problem):
        prior, _, data = make_problem(volterra_op, 10, truncation=5)
        post = exact_posterior(volterra_op, prior, data)
        draws = post.sample_coefficients(40_000, np.random.default_rng(0))
        assert draws.shape == (40_000, 5)
        np.testing.assert_allclose(draws.mean(axis=0), post.mean.coeffs, atol=0.02)
        np.testing.assert_allclose(np.cov(draws.T), post.coefficient_covariance(), atol=0.02)

    def test_gram_size_mismatch(self, volterra_op, make_problem):
        prior, _, data = make_problem(volterra_op, 10)
        gram = build_gram(volterra_op, prior, data.subset(5))
        with pytest.raises(ContractError):
            exact_posterior(volterra_op, prior, data, gram)


class TestLogMarginalLikelihood:
    def test_standard_normal_at_zero(self, volterra_op):
        prior, kernel = zero_kernel(volterra_op)
        data = Dataset([0.5], [0.0])
        gram = build_gram(volterra_op, prior, data, kernel=kernel)
        assert log_marginal_likelihood(data, gram) == pytest.approx(-0.91894, abs=1e-5)

    def test_standard_normal_at_two(self, volterra_op):
        prior, kernel = zero_kernel(volterra_op)
        data = Dataset([0.5], [2.0])
        gram = build_gram(volterra_op, prior, data, kernel=kernel)
        expected = -0.5 * math.log(2.0 * math.pi) - 2.0
        assert log_marginal_likelihood(data, gram) == pytest.approx(expected, abs=1e-12)

    def test_matches_scipy_density(self, heat_op, make_problem):
        from scipy import stats

        prior, _, data = make_problem(heat_op, 15)
        gram = build_gram(heat_op, prior, data)
        cov = gram.K_ff + data.sigma2 * np.eye(data.n)
        expected = stats.multivariate_normal(np.zeros(data.n), cov).logpdf(data.y)
        assert log_marginal_likelihood(data, gram) == pytest.approx(expected, rel=1e-10)

    def test_permutation_invariance(self, volterra_op, make_problem):
        prior, _, data = make_problem(volterra_op, 40)
        shuffled = data.permuted(np.random.default_rng(3).permutation(data.n))
        value = log_marginal_likelihood(data, build_gram(volterra_op, prior, data))
        other = log_marginal_likelihood(shuffled, build_gram(volterra_op, prior, shuffled))
        assert value == pytest.approx(other, abs=1e-10)
