import numpy as np
import pytest

from crcvasicek import (
    HullWhiteExtension,
    ThetaRangeError,
    build_calibration_system,
    calibrate_theta,
    extended_A,
    extended_A_profile,
    extended_yield_curve,
    theta_first,
    yield_curve,
)
from crcvasicek.hullwhite import CalibrationSystem

from conftest import random_factor, random_stationary_params


def perturbed_curve(params, x, m, gen, scale=2e-3):
    """Model curve plus a smooth perturbation vanishing at lag 1 (the lag-1
    yield is pinned to the spot rate and cannot be recalibrated)."""
    y = yield_curve(params, x, m)
    lags = np.arange(1, m + 1)
    bump = scale * np.sin(lags / gen.uniform(5.0, 40.0)) * (lags - 1) / m
    return y + bump


def test_calibration_system_shape(params3, gen):
    x = random_factor(gen, 3)
    y = perturbed_curve(params3, x, 30, gen)
    system = build_calibration_system(params3, 0, x, y)
    assert isinstance(system, CalibrationSystem)
    assert system.c.shape == (29, 29)
    assert np.allclose(np.triu(system.c, 1), 0.0)
    # Toeplitz lower-triangular with B_1 lags down the diagonals
    assert np.allclose(np.diag(system.c), params3.delta)


def test_own_curve_gives_zero_theta(params3, gen):
    x = random_factor(gen, 3)
    y = yield_curve(params3, x, 60)
    hwx = calibrate_theta(params3, 0, x, y)
    assert np.max(np.abs(hwx.theta)) < 1e-10


@pytest.mark.parametrize("n,m", [(1, 120), (3, 120), (1, 1080), (3, 1080)])
def test_round_trip_reprices_target(n, m, gen):
    params = random_stationary_params(gen, n)
    x = random_factor(gen, n)
    y = perturbed_curve(params, x, m, gen)
    hwx = calibrate_theta(params, 0, x, y)
    repriced = extended_yield_curve(params, hwx, x, 0, m)
    assert np.max(np.abs(repriced - y)) / np.max(np.abs(y)) < 1e-10


def test_theta_first_matches_full_solve(params2, gen):
    x = random_factor(gen, 2)
    y = perturbed_curve(params2, x, 40, gen)
    hwx = calibrate_theta(params2, 0, x, y)
    assert theta_first(params2, x, y[1]) == pytest.approx(hwx.theta[0], abs=1e-12)


def test_extended_a_profile_matches_scalar_recursion(params2, gen):
    x = random_factor(gen, 2)
    y = perturbed_curve(params2, x, 25, gen)
    hwx = calibrate_theta(params2, 0, x, y)
    prof = extended_A_profile(params2, hwx.theta, shift=0, max_lag=20)
    for lag in range(1, 21):
        assert prof[lag - 1] == pytest.approx(
            extended_A(params2, hwx, 0, lag), abs=1e-15
        )


def test_zero_theta_reduces_to_unextended(params3, gen):
    x = random_factor(gen, 3)
    hwx = HullWhiteExtension(anchor=0, theta=np.zeros(30))
    ext = extended_yield_curve(params3, hwx, x, 0, 30)
    assert np.allclose(ext, yield_curve(params3, x, 30), atol=1e-14)


def test_theta_range_checked():
    hwx = HullWhiteExtension(anchor=0, theta=np.arange(3.0))
    assert hwx.theta_at(1) == 0.0
    with pytest.raises(ThetaRangeError):
        hwx.theta_at(4)
    with pytest.raises(ThetaRangeError):
        hwx.theta_at(0)


def test_profile_requires_enough_theta(params2):
    with pytest.raises(ThetaRangeError):
        extended_A_profile(params2, np.zeros(5), shift=2, max_lag=10)
