import numpy as np
import pytest

from crcvasicek import (
    VasicekParams,
    compute_A,
    compute_A_all,
    compute_B,
    compute_B_all,
    conditional_moments,
    simulate_factors,
    yield_curve,
)
from crcvasicek.numerics import RngStream

from conftest import random_factor, random_stationary_params


def mc_bond_price(params, x0, lag, n_paths, gen):
    """Bank-account Monte Carlo oracle: independent of the affine recursions.

    P(0, lag) = E[exp(-delta * sum_{s=0}^{lag-1} 1' X(s))], simulating the
    autoregression directly.  Returns (estimate, standard error).
    """
    n = params.n
    x = np.broadcast_to(np.asarray(x0, dtype=float), (n_paths, n)).copy()
    acc = np.full(n_paths, np.sum(x0))
    for _ in range(lag - 1):
        x = params.b + x @ params.beta.T + gen.standard_normal((n_paths, n)) @ params.sigma_sqrt.T
        acc += x.sum(axis=1)
    disc = np.exp(-params.delta * acc)
    return float(np.mean(disc)), float(np.std(disc, ddof=1) / np.sqrt(n_paths))


def test_b_recursion_closed_form_diagonal(params3):
    # diagonal beta: B_i(lag) = delta * sum_{s<lag} beta_i^s
    b_all = compute_B_all(params3, 8)
    beta = np.diag(params3.beta)
    for lag in range(1, 9):
        expect = params3.delta * (1.0 - beta**lag) / (1.0 - beta)
        assert np.allclose(b_all[lag - 1], expect, rtol=1e-13)


def test_b_first_entry(params3):
    assert np.allclose(compute_B(params3, 1), params3.delta * np.ones(3))


def test_a_recursion_by_hand(params2):
    # A(2) = -B(1)'b + 0.5 B(1)' sigma B(1)
    b1 = compute_B(params2, 1)
    expect = -b1 @ params2.b + 0.5 * b1 @ params2.sigma @ b1
    assert compute_A(params2, 2) == pytest.approx(expect, rel=1e-13)
    assert compute_A(params2, 1) == 0.0
    assert np.allclose(compute_A_all(params2, 2), [0.0, expect])


def test_lag1_yield_is_spot_rate(params3, gen):
    x = random_factor(gen, 3)
    y = yield_curve(params3, x, 10)
    assert y[0] == pytest.approx(np.sum(x), rel=1e-13)


def test_conditional_moments_match_simulation(params2, gen):
    x0 = random_factor(gen, 2)
    mean, cov = conditional_moments(params2, x0, 5)
    paths = np.empty((4000, 2))
    rng = RngStream(7)
    for p in range(4000):
        paths[p] = simulate_factors(params2, x0, 5, rng)[-1]
    assert np.allclose(paths.mean(axis=0), mean, atol=4 * np.sqrt(np.diag(cov) / 4000).max())
    assert np.allclose(np.cov(paths.T), cov, rtol=0.15)


def test_mc_oracle_agrees_with_affine_price(gen):
    params = random_stationary_params(gen, 2)
    x0 = random_factor(gen, 2)
    lag = 6
    exact = float(np.exp(compute_A(params, lag) - compute_B(params, lag) @ x0))
    est, se = mc_bond_price(params, x0, lag, 200_000, np.random.default_rng(11))
    assert abs(est - exact) < 4 * se


def test_stationarity_enforced():
    with pytest.raises(ValueError):
        VasicekParams(np.zeros(2), np.diag([1.01, 0.5]), np.eye(2) * 1e-3)


def test_singular_vol_rejected():
    with pytest.raises(ValueError):
        VasicekParams(np.zeros(2), np.diag([0.5, 0.5]), np.zeros((2, 2)))


def test_simulate_factors_shape_and_start(params3, gen):
    x0 = random_factor(gen, 3)
    path = simulate_factors(params3, x0, 12, RngStream(3))
    assert path.shape == (13, 3)
    assert np.array_equal(path[0], x0)
