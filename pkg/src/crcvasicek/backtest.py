"""Zero-coupon-bond portfolio back-testing.

Computes realized hold-period returns of an equally-weighted bond ladder,
simulates the model-implied return distribution by running the curve
engine path-wise under the real-world measure (optionally with stochastic
factor volatility), and scores prediction bands with an exact binomial
coverage test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import stats

from .hullwhite import theta_first
from .crc import CrcState, flat_extend
from .numerics import RngStream, spd_sqrt
from .stochvol import StochVolParams, draw_joint_innovations, stochvol_step
from .vasicek import compute_B_all

__all__ = [
    "PortfolioSpec",
    "ReturnSample",
    "portfolio_log_return",
    "simulate_return_distribution",
    "coverage_test",
    "binomial_tail",
    "kurtosis_bootstrap_ci",
    "DEFAULT_MATURITIES",
]

# Bond ladder: 2,3,4,5,6,9 months and 1,2,3,5,7,10 years on a 21-step month.
DEFAULT_MATURITIES = (42, 63, 84, 105, 126, 189, 252, 504, 756, 1260, 1764, 2520)
DEFAULT_HOLDING = 21

QUANTILE_LEVELS = (0.005, 0.025, 0.05, 0.25, 0.5, 0.75, 0.95, 0.975, 0.995)


@dataclass(frozen=True)
class PortfolioSpec:
    """Equally-weighted ladder of zero-coupon bonds.

    ``maturities`` are times to maturity (grid steps) at purchase;
    ``holding`` is the hold period in steps.  Each bond must outlive the
    holding period.
    """

    maturities: tuple = DEFAULT_MATURITIES
    holding: int = DEFAULT_HOLDING

    def __post_init__(self):
        mats = tuple(int(m) for m in self.maturities)
        object.__setattr__(self, "maturities", mats)
        if not mats:
            raise ValueError("need at least one maturity")
        if self.holding < 0:
            raise ValueError("holding period must be >= 0")
        if any(m <= self.holding for m in mats):
            raise ValueError("every maturity must exceed the holding period")


def _log_prices(curves: np.ndarray, lags: np.ndarray, delta: float) -> np.ndarray:
    """log P(tau) = -y(tau) * tau * delta, curves (..., M), lags 1-based."""
    curves = np.asarray(curves, dtype=float)
    if np.any(lags < 1) or np.any(lags > curves.shape[-1]):
        raise ValueError("maturity beyond curve length")
    return -curves[..., lags - 1] * lags * delta


def portfolio_log_return(
    curve_buy, curve_sell, spec: PortfolioSpec, delta: float
) -> float:
    """log(1 + mean of simple bond returns) over the holding period.

    Each bond of maturity m is bought on ``curve_buy`` and sold ``holding``
    steps later on ``curve_sell`` with residual maturity m - holding.
    """
    mats = np.asarray(spec.maturities, dtype=int)
    lp_buy = _log_prices(np.asarray(curve_buy), mats, delta)
    lp_sell = _log_prices(np.asarray(curve_sell), mats - spec.holding, delta)
    simple = np.expm1(lp_sell - lp_buy)
    return float(np.log1p(np.mean(simple, axis=-1)))


@dataclass
class ReturnSample:
    """Simulated hold-period log-returns with summary statistics."""

    returns: np.ndarray
    holding: int

    def __post_init__(self):
        self.returns = np.asarray(self.returns, dtype=float).ravel()
        if self.returns.size == 0:
            raise ValueError("empty return sample")

    def quantiles(self, levels=QUANTILE_LEVELS) -> dict:
        qs = np.quantile(self.returns, levels)
        return {float(p): float(q) for p, q in zip(levels, qs)}

    def summary(self) -> dict:
        r = self.returns
        return {
            "mean": float(np.mean(r)),
            "std": float(np.std(r, ddof=1)),
            "skewness": float(stats.skew(r, bias=False)),
            "excess_kurtosis": float(stats.kurtosis(r, fisher=True, bias=False)),
            "quantiles": self.quantiles(),
        }

    def band(self, exceed_prob: float = 0.05):
        lo, hi = np.quantile(self.returns, [exceed_prob / 2, 1 - exceed_prob / 2])
        return float(lo), float(hi)


def _batched_sigma_roots(variances: np.ndarray, corr: np.ndarray):
    """Per-path covariance rho_ij sqrt(v_i v_j) and Cholesky roots,
    variances (P, n) -> (P, n, n) twice."""
    vol = np.sqrt(variances)
    sigma = corr[None, :, :] * vol[:, :, None] * vol[:, None, :]
    roots = np.linalg.cholesky(sigma)
    return sigma, roots


def simulate_return_distribution(
    state: CrcState,
    spec: PortfolioSpec,
    n_paths: int,
    rng: RngStream,
    lam=None,
    Lam=None,
    stochvol: Optional[StochVolParams] = None,
    v0=None,
) -> ReturnSample:
    """Model-implied distribution of the portfolio hold-period log-return.

    Runs ``n_paths`` real-world curve paths from ``state`` for ``holding``
    steps, vectorized across paths.  With ``stochvol`` the factor
    covariance is rebuilt each step from the simulated variance path and
    the innovations are drawn jointly with the variance shocks.
    """
    params = state.params
    n, m, delta = params.n, state.m, params.delta
    if max(spec.maturities) > m:
        raise ValueError("portfolio maturity beyond curve length")
    gen = rng.generator
    lam = np.zeros(n) if lam is None else np.asarray(lam, dtype=float)
    big_lam = np.zeros((n, n)) if Lam is None else np.asarray(Lam, dtype=float)

    b_all = compute_B_all(params, m)
    lags = np.arange(1, m + 1)
    ones = np.ones(n)

    curves = np.broadcast_to(state.curve, (n_paths, m)).copy()
    xs = np.broadcast_to(state.x, (n_paths, n)).copy()
    if stochvol is not None:
        base = stochvol.stationary_variances() if v0 is None else np.asarray(v0, float)
        variances = np.broadcast_to(base, (n_paths, n)).copy()

    for _ in range(spec.holding):
        if stochvol is None:
            eps = gen.standard_normal((n_paths, n))
            sig_root = params.sigma_sqrt
            quad = 0.5 * np.einsum("li,ij,lj->l", b_all, params.sigma, b_all)
            quad = np.broadcast_to(quad, (n_paths, m))
            shift = (eps - lam[None, :] - xs @ big_lam.T) @ sig_root.T
            sig1 = np.full(n_paths, ones @ params.sigma @ ones)
        else:
            eps, eps_tilde = draw_joint_innovations(stochvol, gen, n_paths)
            sigma_b, roots = _batched_sigma_roots(variances, stochvol.corr_factors)
            quad = 0.5 * np.einsum("li,pij,lj->pl", b_all, sigma_b, b_all)
            shift = np.einsum(
                "pij,pj->pi", roots, eps - lam[None, :] - xs @ big_lam.T
            )
            sig1 = np.einsum("i,pij,j->p", ones, sigma_b, ones)
            variances = stochvol_step(stochvol, variances, eps_tilde)
        shock = shift @ b_all.T
        # b - sig^1/2 lam + (beta - sig^1/2 Lam) x + sig^1/2 eps collapses
        # to b + beta x + shift.
        x_drift = params.b[None, :] + xs @ params.beta.T + shift

        # theta(1) per path from the lag-2 yield, same O(n) identity the
        # curve engine uses.
        th1 = (
            0.5 * sig1 * delta
            - float(ones @ params.b)
            - xs @ ((np.eye(n) + params.beta).T @ ones)
            + 2.0 * curves[:, 1]
        )
        y_ext = np.concatenate([curves, curves[:, -1:]], axis=1)
        num = (
            y_ext[:, 1:] * ((lags + 1) * delta)[None, :]
            - curves[:, :1] * delta
            + quad
            + shock
        )
        curves = num / (lags * delta)[None, :]
        xs = x_drift
        xs[:, 0] += th1

    mats = np.asarray(spec.maturities, dtype=int)
    lp_buy = _log_prices(state.curve, mats, delta)
    lp_sell = _log_prices(curves, mats - spec.holding, delta)
    simple = np.expm1(lp_sell - lp_buy[None, :])
    returns = np.log1p(np.mean(simple, axis=1))
    return ReturnSample(returns=returns, holding=spec.holding)


def binomial_tail(n: int, k: int, p: float) -> float:
    """P[X >= k] for X ~ Binomial(n, p), summed exactly."""
    if not 0 <= k <= n:
        raise ValueError("need 0 <= k <= n")
    return float(
        math.fsum(
            math.comb(n, j) * p**j * (1.0 - p) ** (n - j) for j in range(k, n + 1)
        )
    )


def coverage_test(
    bands, realized, exceed_prob: float = 0.05, thin_every_second: bool = False
) -> dict:
    """Exceedance count of realized returns outside per-period prediction
    bands and the exact upper-tail binomial p-value.

    ``thin_every_second`` keeps every other period to reduce the overlap
    of consecutive holding windows.
    """
    bands = [(float(lo), float(hi)) for lo, hi in bands]
    realized = np.asarray(realized, dtype=float)
    if len(bands) != realized.size:
        raise ValueError("bands and realized returns must align")
    if thin_every_second:
        bands = bands[::2]
        realized = realized[::2]
    lo = np.array([b[0] for b in bands])
    hi = np.array([b[1] for b in bands])
    exceed = (realized < lo) | (realized > hi)
    n, k = realized.size, int(np.sum(exceed))
    return {
        "n_periods": n,
        "n_exceed": k,
        "exceed_prob": exceed_prob,
        "p_value": binomial_tail(n, k, exceed_prob),
        "exceed_flags": exceed.tolist(),
    }


def kurtosis_bootstrap_ci(
    returns, n_boot: int = 2000, seed: int = 0, level: float = 0.95
):
    """Percentile bootstrap confidence interval for the excess kurtosis."""
    r = np.asarray(returns, dtype=float).ravel()
    gen = RngStream(seed, stream=7).generator
    idx = gen.integers(0, r.size, size=(n_boot, r.size))
    stat = stats.kurtosis(r[idx], axis=1, fisher=True, bias=False)
    lo, hi = np.quantile(stat, [(1 - level) / 2, (1 + level) / 2])
    return float(lo), float(hi)
