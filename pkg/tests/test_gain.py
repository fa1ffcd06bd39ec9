import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fusegain.errors import ShapeMismatch
from fusegain.gain import (
    ChannelMatrix,
    fd_gradient,
    gradient,
    information_gain,
    information_gain_snr_form,
    snr_covariances,
    upper_bound,
)
from fusegain.model import derive, gen_ar_system, gen_example1, gen_scalar_system

from helpers import direct_gain, random_feasible, random_instance, random_orthogonal

# hand values for the all-unit scalar instance
SCALAR_GAIN = 0.5 * np.log(1.5)
SCALAR_GRAD = 1.0 / 6.0  # d/dg of 1/2 log((2g^2+1)/(g^2+1)) at g=1
SCALAR_BOUND = 0.5 * np.log(2.0)


@pytest.fixture(scope="module")
def unit():
    return derive(gen_scalar_system())


def test_zero_matrix_has_zero_gain(unit):
    assert information_gain(np.zeros((1, 1)), unit) == 0.0
    assert information_gain_snr_form(np.zeros((1, 1)), unit) == 0.0
    assert np.all(gradient(np.zeros((1, 1)), unit) == 0.0)


def test_scalar_values(unit):
    G = np.ones((1, 1))
    assert information_gain(G, unit) == pytest.approx(SCALAR_GAIN, abs=1e-15)
    assert information_gain_snr_form(G, unit) == pytest.approx(SCALAR_GAIN, abs=1e-15)
    assert gradient(G, unit)[0, 0] == pytest.approx(SCALAR_GRAD, abs=1e-15)
    assert fd_gradient(G, unit, 1e-6)[0, 0] == pytest.approx(SCALAR_GRAD, abs=1e-6)
    assert upper_bound(unit) == pytest.approx(SCALAR_BOUND, abs=1e-15)


def test_example1_isotropic_gain():
    # per channel 1/2 log(1 + (5/6)(1/5) / (1/5 + 1)) = 1/2 log(41/36)
    sys = gen_example1(1)
    d = derive(sys)
    G = np.eye(5) / np.sqrt(5)
    expected = 2.5 * np.log(41 / 36)
    assert information_gain(G, d) == pytest.approx(expected, abs=1e-13)
    assert direct_gain(G, sys) == pytest.approx(expected, abs=1e-12)
    assert upper_bound(d) == pytest.approx(2.5 * np.log(11 / 6), abs=1e-13)


def test_zero_correlation_bound():
    assert upper_bound(derive(gen_ar_system(0.0))) == 0.0


def test_shape_checked(unit):
    with pytest.raises(ShapeMismatch):
        information_gain(np.zeros((2, 1)), unit)


def test_channel_matrix_power():
    G = ChannelMatrix([[3.0, 4.0]])
    assert G.power == 25.0
    assert G.is_feasible(25.0) and not G.is_feasible(24.9)


def test_snr_covariances_decomposition():
    sys = random_instance(3)
    d = derive(sys)
    G = np.random.default_rng(0).standard_normal((sys.t, sys.q))
    Q_ww, Q_zz = snr_covariances(G, d)
    # total covariance of y minus the part explained by x
    np.testing.assert_allclose(Q_ww + Q_zz - sys.Q_vv, G @ (d.S + d.Q_phph_th) @ G.T, atol=1e-10)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 100_000))
def test_properties_on_random_instances(seed):
    sys = random_instance(seed)
    d = derive(sys)
    rng = np.random.default_rng(seed)
    G = random_feasible(rng, sys.t, sys.q, sys.P)
    D = information_gain(G, d)
    assert D >= -1e-12
    assert abs(D - information_gain_snr_form(G, d)) <= 1e-10 * (1 + D)
    assert abs(D - direct_gain(G, sys)) <= 1e-8 * (1 + D)
    assert D <= upper_bound(d) + 1e-9
    lams = np.linspace(0, 3, 10)
    vals = [information_gain(lam * G, d) for lam in lams]
    assert np.all(np.diff(vals) >= -1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 100_000))
def test_gradient_matches_finite_differences(seed):
    sys = random_instance(seed)
    d = derive(sys)
    G = random_feasible(np.random.default_rng(seed), sys.t, sys.q, sys.P)
    g = gradient(G, d)
    fd = fd_gradient(G, d)
    assert np.linalg.norm(g - fd) <= 1e-5 * np.linalg.norm(g) + 1e-9


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 100_000))
def test_left_orthogonal_invariance_white_noise(seed):
    sys = random_instance(seed, white=True)
    d = derive(sys)
    rng = np.random.default_rng(seed)
    G = random_feasible(rng, sys.t, sys.q, sys.P)
    U = random_orthogonal(rng, sys.t)
    assert information_gain(U @ G, d) == pytest.approx(information_gain(G, d), abs=1e-10)
