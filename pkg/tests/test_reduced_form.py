import numpy as np
import pytest
from scipy.stats import multivariate_normal

from hsvar.errors import BreakOutOfRange, InvalidRegime, MissingValue, UnstableVar, ValidationError
from hsvar.reduced_form import (
    Dataset,
    ReducedForm,
    gls_coefficients,
    gls_estimate,
    impulse_responses,
    log_likelihood,
    long_run_multiplier,
    long_run_responses,
    ml_estimate,
    ols_estimate,
    residuals,
    vma_coefficients,
)
from hsvar.simulate import HsvarTruth, simulate

B2 = np.array([[0.1, 0.5, 0.1, 0.2, 0.0], [-0.2, 0.1, 0.3, 0.0, -0.1]])
TRUTH = HsvarTruth(np.array([[1.0, 0.0], [0.5, 1.0]]), np.array([3.0, 0.5]), B2)


@pytest.fixture(scope="module")
def data():
    return simulate(TRUTH, 600, 300, seed=4)


def test_dataset_shapes(data):
    assert (data.n, data.T, data.m, data.lag_order) == (2, 600, 5, 2)
    assert data.regime_sizes == (300, 300)
    full = data.full_array()
    assert full.shape == (602, 2)
    again = Dataset.from_array(full, 2, 300)
    np.testing.assert_array_equal(again.observations, data.observations)
    assert again.variable_names == ("y1", "y2")


def test_design_alignment():
    full = np.arange(12.0).reshape(6, 2)  # rows are periods
    d = Dataset.from_array(full, 2, 2)
    Y, X = d.design()
    np.testing.assert_array_equal(Y, full[2:].T)
    np.testing.assert_array_equal(X[0], np.ones(4))
    np.testing.assert_array_equal(X[1:3], full[1:5].T)  # lag 1
    np.testing.assert_array_equal(X[3:5], full[0:4].T)  # lag 2


@pytest.mark.parametrize(
    "kwargs, err",
    [
        (dict(break_index=1), BreakOutOfRange),
        (dict(break_index=10), BreakOutOfRange),
        (dict(lag_order=0), ValidationError),
        (dict(names=("a",)), ValidationError),
    ],
)
def test_dataset_validation(kwargs, err):
    full = np.random.default_rng(0).standard_normal((12, 2))
    args = dict(lag_order=2, break_index=5, names=())
    args.update(kwargs)
    with pytest.raises(err):
        Dataset.from_array(full, args["lag_order"], args["break_index"], args["names"])


def test_dataset_missing_value():
    full = np.ones((12, 2))
    full[4, 1] = np.nan
    with pytest.raises(MissingValue):
        Dataset.from_array(full, 1, 5)


def test_ols_matches_lstsq(data):
    rf = ols_estimate(data)
    Y, X = data.design()
    coef, *_ = np.linalg.lstsq(X.T, Y.T, rcond=None)
    np.testing.assert_allclose(rf.B, coef.T, atol=1e-10)
    U1, U2 = residuals(data, rf)
    nm = data.n * data.m
    np.testing.assert_allclose(rf.omega1, U1 @ U1.T / (300 - nm), atol=1e-12)
    np.testing.assert_allclose(rf.omega2, U2 @ U2.T / (300 - nm), atol=1e-12)
    assert rf.info["estimator"] == "ols"


def test_gls_with_equal_weights_is_ols(data):
    W = np.array([[2.0, 0.3], [0.3, 1.0]])
    B = gls_coefficients(data, W, W)
    np.testing.assert_allclose(B, ols_estimate(data).B, atol=1e-10)


def test_gls_matches_stacked_weighted_least_squares(data):
    O1 = np.array([[1.0, 0.2], [0.2, 0.8]])
    O2 = np.array([[3.0, -0.4], [-0.4, 1.5]])
    (Y1, X1), (Y2, X2) = data.regime_design()
    # whiten each regime and run one big least squares on vec(B)
    rows, rhs = [], []
    for Y, X, O in ((Y1, X1, O1), (Y2, X2, O2)):
        P = np.linalg.inv(np.linalg.cholesky(O))
        rows.append(np.kron(X.T, P))
        rhs.append((P @ Y).reshape(-1, order="F"))
    phi, *_ = np.linalg.lstsq(np.vstack(rows), np.concatenate(rhs), rcond=None)
    np.testing.assert_allclose(gls_coefficients(data, O1, O2), phi.reshape(2, 5, order="F"), atol=1e-9)


def test_log_likelihood_matches_scipy(data):
    rf = gls_estimate(data)
    U1, U2 = residuals(data, rf)
    ref = multivariate_normal(np.zeros(2), rf.omega1).logpdf(U1.T).sum()
    ref += multivariate_normal(np.zeros(2), rf.omega2).logpdf(U2.T).sum()
    assert log_likelihood(data, rf) == pytest.approx(ref, rel=1e-12)


def test_ml_first_order_conditions(data):
    rf = ml_estimate(data, tol=1e-12)
    B = gls_coefficients(data, rf.omega1, rf.omega2)
    np.testing.assert_allclose(B, rf.B, atol=1e-6)
    U1, U2 = residuals(data, rf)
    np.testing.assert_allclose(rf.omega1, U1 @ U1.T / U1.shape[1], atol=1e-6)
    np.testing.assert_allclose(rf.omega2, U2 @ U2.T / U2.shape[1], atol=1e-6)
    trace = rf.info["loglik_trace"]
    assert np.all(np.diff(trace) >= -1e-9)
    assert log_likelihood(data, rf) >= log_likelihood(data, gls_estimate(data)) - 1e-9


def test_ml_recovers_truth_roughly():
    d = simulate(TRUTH, 4000, 2000, seed=1)
    rf = ml_estimate(d)
    true = TRUTH.reduced_form()
    np.testing.assert_allclose(rf.B, true.B, atol=0.08)
    np.testing.assert_allclose(rf.omega2, true.omega2, rtol=0.12, atol=0.12)


def test_short_regime_rejected():
    full = np.random.default_rng(0).standard_normal((30, 2))
    d = Dataset.from_array(full, 1, 3)
    with pytest.raises(InvalidRegime):
        ols_estimate(d)


def test_vma_matches_companion_powers():
    rf = TRUTH.reduced_form()
    H = 10
    vma = vma_coefficients(rf, H)
    F = rf.companion()
    n = rf.n
    for h in range(H + 1):
        np.testing.assert_allclose(vma.C[h], np.linalg.matrix_power(F, h)[:n, :n], atol=1e-12)
    assert vma.horizons == H
    with pytest.raises(ValidationError):
        vma_coefficients(rf, -1)


def test_long_run_objects():
    rf = TRUTH.reduced_form()
    total = vma_coefficients(rf, 400).C.sum(axis=0)
    np.testing.assert_allclose(long_run_multiplier(rf), total, atol=1e-10)
    C = TRUTH.C
    ir_inf, cir_inf = long_run_responses(rf, C)
    np.testing.assert_allclose(cir_inf, total @ C, atol=1e-10)
    np.testing.assert_allclose(ir_inf, (np.eye(2) - rf.lag_sum()) @ C, atol=1e-12)
    irf = impulse_responses(rf, C, 3)
    np.testing.assert_allclose(irf[0], C)


def test_stability_flags():
    rf = TRUTH.reduced_form()
    assert rf.stable and rf.spectral_radius() < 1
    explosive = ReducedForm(np.array([[0.0, 1.1]]), np.eye(1), np.eye(1))
    assert not explosive.stable
    with pytest.raises(UnstableVar):
        long_run_multiplier(explosive)
