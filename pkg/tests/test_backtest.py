import numpy as np
import pytest

from crcvasicek import (
    ParameterUpdate,
    PortfolioSpec,
    StochVolParams,
    binomial_tail,
    coverage_test,
    crc_init,
    crc_step_real_world,
    portfolio_log_return,
    simulate_return_distribution,
    yield_curve,
)
from crcvasicek.backtest import ReturnSample, kurtosis_bootstrap_ci
from crcvasicek.numerics import RngStream

from conftest import random_factor
from test_hullwhite import perturbed_curve


def test_portfolio_spec_validation():
    with pytest.raises(ValueError):
        PortfolioSpec(maturities=(10,), holding=21)
    with pytest.raises(ValueError):
        PortfolioSpec(maturities=())
    spec = PortfolioSpec()
    assert spec.holding == 21
    assert len(spec.maturities) == 12


def test_zero_holding_return_is_zero():
    curve = np.full(300, 0.02)
    spec = PortfolioSpec(maturities=(42, 252), holding=0)
    assert portfolio_log_return(curve, curve, spec, 1 / 252) == pytest.approx(0.0, abs=1e-15)


def test_flat_curve_carry():
    # flat curve frozen in time: every bond earns exactly y * h * delta
    y, h, delta = 0.03, 21, 1 / 252
    curve = np.full(300, y)
    spec = PortfolioSpec(maturities=(42, 126, 252), holding=h)
    r = portfolio_log_return(curve, curve, spec, delta)
    assert r == pytest.approx(y * h * delta, rel=1e-12)


def test_single_bond_return_hand_computed():
    delta = 1 / 252
    curve_buy = np.linspace(0.01, 0.03, 100)
    curve_sell = np.linspace(0.012, 0.031, 100)
    spec = PortfolioSpec(maturities=(50,), holding=10)
    lp_buy = -curve_buy[49] * 50 * delta
    lp_sell = -curve_sell[39] * 40 * delta
    expect = lp_sell - lp_buy  # single bond: log portfolio return is the bond's
    assert portfolio_log_return(curve_buy, curve_sell, spec, delta) == pytest.approx(expect)


def test_maturity_beyond_curve_rejected():
    spec = PortfolioSpec(maturities=(500,), holding=21)
    with pytest.raises(ValueError):
        portfolio_log_return(np.full(300, 0.02), np.full(300, 0.02), spec, 1 / 252)


@pytest.fixture
def state2(params2, gen):
    x = random_factor(gen, 2)
    y = perturbed_curve(params2, x, 300, gen)
    return crc_init(params2, x, y)


def test_simulated_path_matches_engine(state2):
    """One path of the vectorized simulator equals stepping the curve
    engine directly with the same innovations."""
    spec = PortfolioSpec(maturities=(42, 126), holding=5)
    lam = np.array([0.05, -0.02])
    big = np.zeros((2, 2))
    sample = simulate_return_distribution(
        state2, spec, 1, RngStream(123), lam=lam, Lam=big
    )
    gen = RngStream(123).generator
    s = state2
    upd = ParameterUpdate(state2.params, lam, big)
    for _ in range(5):
        s = crc_step_real_world(s, upd, gen.standard_normal(2))
    expect = portfolio_log_return(state2.curve, s.curve, spec, state2.params.delta)
    assert sample.returns[0] == pytest.approx(expect, abs=1e-12)


def test_return_sample_summary(gen):
    r = gen.standard_normal(5000) * 0.01
    sample = ReturnSample(returns=r, holding=21)
    s = sample.summary()
    assert abs(s["mean"]) < 1e-3
    assert s["std"] == pytest.approx(0.01, rel=0.05)
    q = s["quantiles"]
    assert q[0.025] < q[0.5] < q[0.975]
    lo, hi = sample.band(0.05)
    assert lo == pytest.approx(q[0.025]) and hi == pytest.approx(q[0.975])


def test_stochvol_route_runs_and_widens_tails(state2):
    spec = PortfolioSpec(maturities=(42, 126), holding=10)
    sv = StochVolParams(
        varphi=np.array([1e-7, 5e-8]),
        phi_diag=np.array([0.95, 0.9]),
        phi_sqrt=np.diag([4e-7, 2e-7]),
    )
    sample = simulate_return_distribution(
        state2, spec, 4000, RngStream(9), stochvol=sv
    )
    assert np.all(np.isfinite(sample.returns))
    assert sample.returns.size == 4000


def test_binomial_tail_edge_cases():
    assert binomial_tail(10, 0, 0.1) == pytest.approx(1.0)
    assert binomial_tail(10, 10, 0.5) == pytest.approx(0.5**10)
    with pytest.raises(ValueError):
        binomial_tail(10, 11, 0.5)


def test_coverage_test_counts_and_thins():
    bands = [(-1.0, 1.0)] * 6
    realized = [0.0, 2.0, 0.0, -3.0, 0.5, 0.2]
    rep = coverage_test(bands, realized, exceed_prob=0.1)
    assert rep["n_exceed"] == 2 and rep["n_periods"] == 6
    assert rep["p_value"] == pytest.approx(binomial_tail(6, 2, 0.1))
    thinned = coverage_test(bands, realized, exceed_prob=0.1, thin_every_second=True)
    assert thinned["n_periods"] == 3 and thinned["n_exceed"] == 0


def test_kurtosis_bootstrap_ci_brackets_gaussian(gen):
    r = gen.standard_normal(4000)
    lo, hi = kurtosis_bootstrap_ci(r, n_boot=500, seed=3)
    assert lo < 0.0 < hi
