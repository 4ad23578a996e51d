import numpy as np
import pytest

from hsvar.errors import UnstableVar, ValidationError
from hsvar.scenarios import SCENARIOS, get_scenario
from hsvar.simulate import HsvarTruth, random_truth, simulate

C = np.array([[1.0, 0.3], [-0.2, 1.0]])
B = np.array([[0.1, 0.5, 0.0], [0.0, 0.1, 0.3]])


def test_shapes_and_break():
    d = simulate(HsvarTruth(C, np.array([2.0, 0.5]), B), 300, 120, seed=1, names=("a", "b"))
    assert d.T == 300 and d.break_index == 120 and d.n == 2 and d.lag_order == 1
    assert d.full_array().shape == (301, 2) and d.variable_names == ("a", "b")


def test_regime_variance_ratio():
    truth = HsvarTruth(C, np.array([9.0, 0.25]), np.zeros((2, 3)))
    d = simulate(truth, 40_000, 20_000, seed=2)
    y = d.full_array()[1:]
    s1, s2 = np.cov(y[:20_000].T), np.cov(y[20_000:].T)
    np.testing.assert_allclose(s1, C @ C.T, atol=0.05)
    np.testing.assert_allclose(s2, C @ np.diag([9.0, 0.25]) @ C.T, atol=0.25)


def test_reproducible():
    truth = HsvarTruth(C, np.array([2.0, 0.5]), B)
    a = simulate(truth, 100, 50, seed=7).full_array()
    np.testing.assert_array_equal(a, simulate(truth, 100, 50, seed=7).full_array())
    assert not np.array_equal(a, simulate(truth, 100, 50, seed=8).full_array())


def test_validation_and_unstable():
    with pytest.raises(UnstableVar):
        simulate(HsvarTruth(C, np.array([1.0, 1.0]), np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])), 50, 25)
    with pytest.raises(ValidationError):
        HsvarTruth(C, np.array([1.0, -1.0]), B)
    with pytest.raises(ValidationError):
        HsvarTruth(C, np.array([1.0, 1.0, 1.0]), B)


@pytest.mark.parametrize("n, lags", [(2, 1), (3, 2), (4, 3)])
def test_random_truth(n, lags, rng):
    t = random_truth(n, lags, np.linspace(3.0, 0.5, n), rng)
    assert t.n == n and t.lag_order == lags
    assert np.all(np.diag(t.C) > 0) and t.reduced_form().stable


@pytest.mark.parametrize("name", SCENARIOS)
def test_scenarios(name):
    sc = get_scenario(name, 200)
    assert sc.T_B == 100 and sc.truth.n == 3 and sc.lag_order == 1
    assert sc.truth.reduced_form().stable


def test_unknown_scenario():
    with pytest.raises(ValidationError):
        get_scenario("m9")
