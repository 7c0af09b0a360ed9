import numpy as np
import pytest

from crcvasicek import (
    CrcState,
    ParameterUpdate,
    VasicekParams,
    crc_init,
    crc_step_explicit,
    crc_step_hjm,
    crc_step_real_world,
    density_process,
    flat_extend,
    verify_recalibration,
    yield_curve,
)
from crcvasicek.crc import path_to_csv
from crcvasicek.numerics import RngStream

from conftest import random_factor, random_stationary_params

from test_hullwhite import perturbed_curve


def random_update(gen, n, delta):
    return ParameterUpdate(params=random_stationary_params(gen, n, delta))


def test_init_reprices_curve(params3, gen):
    x = random_factor(gen, 3)
    y = perturbed_curve(params3, x, 60, gen)
    state = crc_init(params3, x, y)
    assert verify_recalibration(state) < 1e-12


def test_recalibration_leaves_curve_unchanged(params3, gen):
    """The defining invariant: the parameter update inside a step does not
    move the prevailing curve."""
    x = random_factor(gen, 3)
    y = perturbed_curve(params3, x, 40, gen)
    state = crc_init(params3, x, y)
    stepped = crc_step_explicit(state, random_update(gen, 3, params3.delta), gen.standard_normal(3))
    assert verify_recalibration(stepped) < 1e-10


def test_hjm_equals_explicit_single_step(params3, gen):
    x = random_factor(gen, 3)
    y = perturbed_curve(params3, x, 50, gen)
    state = crc_init(params3, x, y)
    upd = random_update(gen, 3, params3.delta)
    eps = gen.standard_normal(3)
    a = crc_step_explicit(state, upd, eps)
    b = crc_step_hjm(state, upd, eps)
    assert np.max(np.abs(a.curve - b.curve)) < 1e-12
    assert np.max(np.abs(a.x - b.x)) < 1e-12


def test_real_world_zero_mpr_equals_hjm(params2, gen):
    x = random_factor(gen, 2)
    y = perturbed_curve(params2, x, 30, gen)
    state = crc_init(params2, x, y)
    upd = random_update(gen, 2, params2.delta)
    eps = gen.standard_normal(2)
    a = crc_step_hjm(state, upd, eps)
    b = crc_step_real_world(state, ParameterUpdate(upd.params, np.zeros(2), np.zeros((2, 2))), eps)
    assert np.array_equal(a.curve, b.curve)
    assert np.array_equal(a.x, b.x)


def test_real_world_mpr_shifts_drift(params2, gen):
    x = random_factor(gen, 2)
    y = perturbed_curve(params2, x, 30, gen)
    state = crc_init(params2, x, y)
    lam = np.array([0.1, -0.05])
    upd = ParameterUpdate(state.params, lam, np.zeros((2, 2)))
    # stepping with shocks eps under lam equals risk-neutral stepping with
    # shifted shocks eps - lam
    eps = gen.standard_normal(2)
    a = crc_step_real_world(state, upd, eps)
    b = crc_step_hjm(state, ParameterUpdate(state.params), eps - lam)
    assert np.allclose(a.curve, b.curve, atol=1e-15)
    assert np.allclose(a.x, b.x, atol=1e-15)


def test_explosive_real_world_dynamics_rejected(params2, gen):
    x = random_factor(gen, 2)
    y = perturbed_curve(params2, x, 20, gen)
    state = crc_init(params2, x, y)
    big_lam = -np.eye(2) / np.max(np.abs(params2.sigma_sqrt))
    with pytest.raises(ValueError):
        crc_step_real_world(state, ParameterUpdate(state.params, np.zeros(2), big_lam), np.zeros(2))


def test_curve_length_is_preserved(params3, gen):
    x = random_factor(gen, 3)
    y = perturbed_curve(params3, x, 35, gen)
    state = crc_init(params3, x, y)
    for _ in range(5):
        state = crc_step_hjm(state, ParameterUpdate(state.params), gen.standard_normal(3))
    assert state.m == 35
    assert state.k == 5


def test_spot_rate_consistency_after_step(params3, gen):
    x = random_factor(gen, 3)
    y = perturbed_curve(params3, x, 25, gen)
    state = crc_init(params3, x, y)
    nxt = crc_step_hjm(state, ParameterUpdate(state.params), gen.standard_normal(3))
    assert nxt.curve[0] == pytest.approx(nxt.spot_rate, abs=1e-12)


def test_flat_extend():
    assert np.array_equal(flat_extend(np.array([1.0, 2.0])), [1.0, 2.0, 2.0])


def test_density_process_zero_mpr_is_one(gen):
    k, n = 6, 2
    factors = gen.standard_normal((k, n))
    eps = gen.standard_normal((k, n))
    xi = density_process(factors, np.zeros((k, n)), np.zeros((k, n, n)), eps)
    assert np.array_equal(xi, np.ones(k + 1))


def test_density_process_hand_computed():
    lam = np.array([[0.5]])
    x = np.array([[2.0]])
    big = np.array([[[0.1]]])
    eps = np.array([[1.5]])
    mpr = 0.5 + 0.1 * 2.0
    expect = np.exp(-0.5 * mpr**2 + mpr * 1.5)
    xi = density_process(x, lam, big, eps)
    assert xi[1] == pytest.approx(expect, rel=1e-14)


def test_path_to_csv_round_trips(tmp_path, params2, gen):
    x = random_factor(gen, 2)
    y = perturbed_curve(params2, x, 10, gen)
    states = [crc_init(params2, x, y)]
    for _ in range(3):
        states.append(
            crc_step_hjm(states[-1], ParameterUpdate(params2), gen.standard_normal(2))
        )
    out = tmp_path / "path.csv"
    path_to_csv(states, out)
    data = np.loadtxt(out, delimiter=",", skiprows=1)
    assert data.shape == (4, 1 + 2 + 10)
    assert np.array_equal(data[:, 0], np.arange(4))
    assert np.array_equal(data[2, 3:], states[2].curve)
