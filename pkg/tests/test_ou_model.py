import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oushift.ou_model import (
    ModelParams,
    SimGrid,
    covariance,
    covariance_scaled,
    joint_moments,
    simulate_path,
    simulate_terminal_pair,
)

mp.mp.dps = 25


def oracle_moments(phi, T):
    """(a_T, b_T, c_T) by direct quadrature of the OU covariance kernel."""
    phi, T = mp.mpf(phi), mp.mpf(T)
    if phi == 0:
        cov = lambda s, t: min(s, t)
    else:
        cov = lambda s, t: mp.exp(phi * abs(t - s)) * mp.expm1(2 * phi * min(s, t)) / (2 * phi)
    a = cov(T, T)
    b = mp.quad(lambda s: cov(T, s), [0, T]) / T
    # symmetric kernel: twice the integral over t < s, with t = s u
    c = 2 * mp.quad(lambda s, u: cov(s, s * u) * s, [0, T], [0, 1]) / T**2
    return a, b, c


def test_params_reject_nonnegative_theta():
    with pytest.raises(ValueError, match="strictly negative"):
        ModelParams(0.0)
    with pytest.raises(ValueError):
        ModelParams(1.0, 2.0)
    with pytest.raises(ValueError):
        ModelParams(-1.0, math.nan)


def test_params_helpers():
    p = ModelParams(-2.0, 1.0)
    assert p.stationary_mean == 0.5
    assert p.stationary_var == 0.25


def test_grid_validation_and_dt():
    g = SimGrid(10.0, 1000)
    assert g.dt * g.n_steps == pytest.approx(10.0, rel=1e-15)
    assert g.times[-1] == 10.0
    assert g.trapezoid_weights().sum() == pytest.approx(10.0, rel=1e-14)
    assert SimGrid.from_dt(10.0, 1e-2).n_steps == 1000
    for bad in [(0.0, 10), (1.0, 0), (1.0, 2.5), (math.inf, 3)]:
        with pytest.raises(ValueError):
            SimGrid(*bad)


def test_joint_moments_example():
    jm = joint_moments(-1.0, 0.0, 1.0)
    assert jm.a_T == pytest.approx((1 - math.exp(-2)) / 2, rel=1e-12)
    assert jm.a_T == pytest.approx(0.432332, abs=1e-6)
    assert jm.m_T == 0 and jm.mu_T == 0


def test_joint_moments_means():
    th, g, T = -2.0, 2.0, 3.0
    jm = joint_moments(th, g, T)
    assert jm.m_T == pytest.approx(-(g / th) * (1 - math.exp(th * T)), rel=1e-13)
    assert jm.mu_T == pytest.approx(-(g / th) * (1 + (1 - math.exp(th * T)) / (th * T)), rel=1e-13)
    assert joint_moments(-2.0, 2.0, 50.0).m_T == pytest.approx(1.0, rel=1e-12)


@pytest.mark.parametrize("phi,T", [(-1.0, 1.0), (-2.0, 7.5), (-0.3, 0.2), (0.0, 2.0), (1e-5, 3.0), (0.4, 2.0), (-1e-3, 1.0)])
def test_covariance_matches_quadrature_oracle(phi, T):
    a, b, c = oracle_moments(phi, T)
    jm = joint_moments(phi, 0.0, T)
    assert jm.a_T == pytest.approx(float(a), rel=1e-12)
    assert jm.b_T == pytest.approx(float(b), rel=1e-12)
    assert jm.c_T == pytest.approx(float(c), rel=1e-12)


@pytest.mark.parametrize("phi,T", [(1.5, 4.0), (2.0, 12.0)])
def test_scaled_covariance_matches_oracle(phi, T):
    with mp.workdps(60):
        a, b, c = oracle_moments(phi, T)
        det_true = a * c - b * b
    sa, sb, sc, det, log_s = covariance_scaled(phi, T)
    scale = mp.exp(log_s)
    # the scaled determinant carries a single power of the scale
    assert sa == pytest.approx(float(a / scale), rel=1e-12)
    assert sb == pytest.approx(float(b / scale), rel=1e-12)
    assert sc == pytest.approx(float(c / scale), rel=1e-12)
    assert det == pytest.approx(float(det_true / scale), rel=1e-9)


def test_series_branch_is_continuous():
    # the two evaluations on either side of the series cutoff agree
    for x in (0.5 - 1e-9, 0.5 + 1e-9, -0.5 - 1e-9, -0.5 + 1e-9):
        a, b, c = oracle_moments(x, 1.0)
        m = covariance(x, 1.0)
        assert m[0, 1] == pytest.approx(float(b), rel=1e-13)
        assert m[1, 1] == pytest.approx(float(c), rel=1e-13)


def test_large_positive_phi_overflows_unscaled():
    with pytest.raises(OverflowError):
        joint_moments(3.0, 0.0, 10.0)


@settings(max_examples=200, deadline=None)
@given(st.floats(-10, -1e-3), st.floats(1e-3, 200.0), st.floats(-5, 5))
def test_covariance_positive_definite(theta, T, gamma):
    jm = joint_moments(theta, gamma, T)
    assert jm.a_T > 0 and jm.c_T > 0
    assert jm.a_T * jm.c_T - jm.b_T**2 >= 0
    assert 0 < jm.a_T <= -1 / (2 * theta) * (1 + 1e-15)


def test_noise_free_path_is_the_mean():
    p = ModelParams(-2.0, 2.0)
    grid = SimGrid(1.0, 100)
    x = simulate_path(p, grid, noise=False)
    assert x[-1] == pytest.approx(1 - math.exp(-2), rel=1e-13)
    assert x[-1] == pytest.approx(0.864665, abs=1e-6)
    expected = -(p.gamma / p.theta) * (1 - np.exp(p.theta * grid.times))
    np.testing.assert_allclose(x, expected, rtol=1e-12, atol=1e-15)


def test_simulate_path_deterministic():
    p = ModelParams(-1.0, 0.5)
    grid = SimGrid(5.0, 50)
    np.testing.assert_array_equal(simulate_path(p, grid, 7), simulate_path(p, grid, 7))
    assert not np.array_equal(simulate_path(p, grid, 7), simulate_path(p, grid, 8))
    assert simulate_path(p, grid, 7)[0] == 0.0


@pytest.mark.parametrize("n_steps", [10, 20])
def test_path_terminal_law_is_exact(n_steps):
    # the transition is exact, so X_T has the continuous-time law at any resolution
    p = ModelParams(-1.0, 0.5)
    grid = SimGrid(2.0, n_steps)
    n = 4000
    xs = np.array([simulate_path(p, grid, s)[-1] for s in range(n)])
    jm = joint_moments(p.theta, p.gamma, grid.T)
    assert abs(xs.mean() - jm.m_T) < 4 * math.sqrt(jm.a_T / n)
    assert abs(xs.var() / jm.a_T - 1) < 4 * math.sqrt(2 / n)


def test_terminal_pair_moments():
    p = ModelParams(-2.0, 1.0)
    T = 3.0
    n = 200_000
    draws = simulate_terminal_pair(p, T, seed=3, size=n)
    jm = joint_moments(p.theta, p.gamma, T)
    se = np.sqrt(np.diag(jm.cov) / n)
    assert np.all(np.abs(draws.mean(axis=0) - jm.mean) < 4 * se)
    np.testing.assert_allclose(np.cov(draws.T), jm.cov, rtol=0.02)
    assert simulate_terminal_pair(p, T, seed=1).shape == (2,)
