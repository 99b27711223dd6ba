"""Shared fixtures: small operators, priors and synthetic datasets."""

import pytest

from src.harness.experiment import generate_data
from src.harness.truths import make_truth
from src.spectral.model import PriorSpectrum
from src.spectral.operators import build_operator, heat, radon, volterra


@pytest.fixture
def volterra_op():
    return volterra()


@pytest.fixture
def heat_op():
    return heat(0.01)


@pytest.fixture
def radon_op():
    return radon()


@pytest.fixture(params=["volterra", "heat", "radon"])
def any_op(request):
    return build_operator(request.param)


@pytest.fixture
def make_problem():
    """Factory for (prior, truth, data) with an explicit truncation."""

    def factory(op, n, truncation=20, beta=1.0, alpha=None, seed=0, sigma2=1.0):
        prior = PriorSpectrum.polynomial(beta if alpha is None else alpha, truncation)
        truth = make_truth(op.name, beta, truncation, op)
        data = generate_data(op, truth, n, sigma2, seed)
        return prior, truth, data

    return factory
