import numpy as np
import pytest

from hsvar.errors import InvalidRegime, ValidationError
from hsvar.gibbs import (
    GibbsConfig,
    GibbsSampler,
    PriorSpec,
    batch_means_se,
    default_diffuse_prior,
    draw_omegas_given_phi,
    draw_phi_given_omegas,
    omega_posterior_params,
    posterior_phi_moments,
    run_gibbs,
)
from hsvar.reduced_form import gls_coefficients
from hsvar.simulate import HsvarTruth, simulate

TRUTH = HsvarTruth(np.array([[1.0, 0.2], [-0.3, 1.0]]), np.array([2.0, 0.5]), np.array([[0.0, 0.4, 0.1], [0.1, 0.0, 0.3]]))


@pytest.fixture(scope="module")
def data():
    return simulate(TRUTH, 400, 200, seed=2)


def test_prior_validation():
    with pytest.raises(ValidationError):
        PriorSpec(np.zeros(6), None, np.eye(2), np.eye(2), 3.0, 4.0)
    p = default_diffuse_prior(2, 3)
    assert p.d1 == p.d2 == 4
    # prior mean of each covariance is the identity
    np.testing.assert_allclose(p.S1 / (p.d1 - 2 - 1), np.eye(2))
    flat = PriorSpec(np.zeros(6), None, np.eye(2), np.eye(2), 4.0, 4.0)
    np.testing.assert_array_equal(flat.precision, np.zeros((6, 6)))


@pytest.mark.parametrize("bad", [dict(draws=0), dict(draws=5, thinning=0), dict(draws=5, burn_in=-1)])
def test_config_validation(bad):
    with pytest.raises(ValidationError):
        GibbsConfig(**bad)


def test_flat_prior_conditional_mean_is_gls(data):
    prior = PriorSpec(np.zeros(6), None, np.eye(2), np.eye(2), 4.0, 4.0)
    O1 = np.array([[1.0, 0.1], [0.1, 0.9]])
    O2 = np.array([[2.0, -0.2], [-0.2, 0.6]])
    mean, cov = posterior_phi_moments(data, prior, O1, O2)
    np.testing.assert_allclose(mean.reshape(2, 3, order="F"), gls_coefficients(data, O1, O2), atol=1e-10)
    (_, X1), (_, X2) = data.regime_design()
    P = np.kron(X1 @ X1.T, np.linalg.inv(O1)) + np.kron(X2 @ X2.T, np.linalg.inv(O2))
    np.testing.assert_allclose(cov, np.linalg.inv(P), rtol=1e-8, atol=1e-14)


def test_phi_draws_have_conditional_moments(data):
    prior = default_diffuse_prior(2, 3)
    O1, O2 = np.eye(2), 2 * np.eye(2)
    mean, cov = posterior_phi_moments(data, prior, O1, O2)
    rng = np.random.default_rng(0)
    draws = np.array([draw_phi_given_omegas(data, prior, O1, O2, rng) for _ in range(4000)])
    se = np.sqrt(np.diag(cov) / len(draws))
    assert np.all(np.abs(draws.mean(axis=0) - mean) < 4.5 * se)
    np.testing.assert_allclose(np.cov(draws.T), cov, rtol=0.15, atol=0.1 * np.abs(cov).max())


def test_omega_posterior_params(rng):
    U = rng.standard_normal((2, 50))
    S = np.eye(2)
    scale, dof = omega_posterior_params(U, S, 5.0)
    np.testing.assert_allclose(scale, S + U @ U.T)
    assert dof == 55.0
    with pytest.raises(InvalidRegime):
        omega_posterior_params(np.zeros((2, 0)), S, 5.0)


def test_omega_draws_are_spd(data):
    prior = default_diffuse_prior(2, 3)
    O1, O2 = draw_omegas_given_phi(data, prior, TRUTH.B.reshape(-1, order="F"), np.random.default_rng(1))
    assert np.all(np.linalg.eigvalsh(O1) > 0) and np.all(np.linalg.eigvalsh(O2) > 0)


def test_chain_shapes_and_thinning(data):
    prior = default_diffuse_prior(2, 3)
    draws = run_gibbs(data, prior, GibbsConfig(draws=30, burn_in=5, thinning=2, seed=3))
    assert len(draws) == 30
    assert draws.B.shape == (30, 2, 3) and draws.omega1.shape == (30, 2, 2)
    assert draws.stable.dtype == bool and draws.stable.all()
    rf = draws[4]
    np.testing.assert_array_equal(rf.B, draws.B[4])
    mean = draws.mean()
    np.testing.assert_allclose(mean.omega2, draws.omega2.mean(axis=0))
    assert sum(1 for _ in draws) == 30


def test_sampler_resumes_the_same_chain(data):
    prior = default_diffuse_prior(2, 3)
    a = GibbsSampler(data, prior, seed=9)
    first = a.sample(10)
    second = a.sample(10)
    b = GibbsSampler(data, prior, seed=9).sample(20)
    np.testing.assert_array_equal(np.concatenate([first.B, second.B]), b.B)


def test_batch_means_iid():
    x = np.random.default_rng(0).standard_normal((20000, 2))
    se = batch_means_se(x)
    np.testing.assert_allclose(se, 1 / np.sqrt(20000), rtol=0.4)
    with pytest.raises(ValidationError):
        batch_means_se(np.zeros(10))
