"""Time-homogeneous discrete-time multifactor Vasicek model.

The n-dimensional factor X evolves under the pricing measure as

    X(t) = b + beta X(t-1) + sigma_sqrt eps*(t),   eps* ~ N(0, 1),

the spot rate is r(t) = 1' X(t), and zero-coupon bond prices have the affine
form P = exp(A - B' X).  The A and B coefficients depend only on the lag
(time to maturity in grid steps) and are computed by their one-step
recursions, so a mean-reversion matrix with eigenvalue 0 or a near-singular
1 - beta is harmless.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numerics import RngStream, as_matrix, as_vector, stationary_check

__all__ = [
    "VasicekParams",
    "FactorState",
    "compute_B",
    "compute_B_all",
    "compute_A",
    "compute_A_all",
    "yield_curve",
    "conditional_moments",
    "simulate_factors",
]


@dataclass(frozen=True)
class VasicekParams:
    """Parameter tuple (b, beta, sigma_sqrt) on a grid of size delta years.

    b is the drift vector (rate units per step), beta the n x n
    mean-reversion matrix with spectrum inside (-1, 1), and sigma_sqrt a
    non-singular lower-triangular volatility matrix; the instantaneous
    covariance sigma = sigma_sqrt @ sigma_sqrt.T is derived, never stored.
    """

    b: np.ndarray
    beta: np.ndarray
    sigma_sqrt: np.ndarray
    delta: float = 1.0 / 252.0

    def __post_init__(self):
        b = as_vector(self.b, "b")
        beta = as_matrix(self.beta, "beta")
        sig = as_matrix(self.sigma_sqrt, "sigma_sqrt")
        n = b.size
        if beta.shape != (n, n) or sig.shape != (n, n):
            raise ValueError("b, beta and sigma_sqrt have inconsistent dimensions")
        if not stationary_check(beta):
            raise ValueError("spectrum of beta must lie inside (-1, 1)")
        if np.any(np.diag(sig) == 0.0):
            raise ValueError("sigma_sqrt must be non-singular (nonzero diagonal)")
        if self.delta <= 0.0:
            raise ValueError("delta must be positive")
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "sigma_sqrt", sig)

    @property
    def n(self) -> int:
        return self.b.size

    @property
    def sigma(self) -> np.ndarray:
        return self.sigma_sqrt @ self.sigma_sqrt.T


@dataclass(frozen=True)
class FactorState:
    """Factor vector together with its integer time step."""

    x: np.ndarray
    t: int = 0

    def __post_init__(self):
        object.__setattr__(self, "x", as_vector(self.x, "factor"))


def _factor(x) -> np.ndarray:
    if isinstance(x, FactorState):
        return x.x
    return as_vector(x, "factor")


def compute_B_all(params: VasicekParams, max_lag: int) -> np.ndarray:
    """B coefficients for lags 1..max_lag, shape (max_lag, n).

    Cumulative-sum recursion B(l) = beta' B(l-1) + 1 delta with
    B(1) = 1 delta; equals delta * sum_{s<l} (beta')^s 1.
    """
    if max_lag < 1:
        raise ValueError("lag must be >= 1")
    n = params.n
    out = np.empty((max_lag, n))
    ones_delta = np.full(n, params.delta)
    out[0] = ones_delta
    beta_t = params.beta.T
    for lag in range(1, max_lag):
        out[lag] = beta_t @ out[lag - 1] + ones_delta
    return out


def compute_B(params: VasicekParams, lag: int) -> np.ndarray:
    return compute_B_all(params, lag)[-1]


def compute_A_all(params: VasicekParams, max_lag: int) -> np.ndarray:
    """A coefficients for lags 1..max_lag; A(1) = 0 and

    A(l) = A(l-1) - B(l-1)' b + 0.5 B(l-1)' sigma B(l-1).
    """
    b_all = compute_B_all(params, max_lag)
    sigma = params.sigma
    out = np.empty(max_lag)
    out[0] = 0.0
    for lag in range(1, max_lag):
        bb = b_all[lag - 1]
        out[lag] = out[lag - 1] - bb @ params.b + 0.5 * bb @ sigma @ bb
    return out


def compute_A(params: VasicekParams, lag: int) -> float:
    return float(compute_A_all(params, lag)[-1])


def yield_curve(params: VasicekParams, state, max_lag: int) -> np.ndarray:
    """Annualized continuously-compounded yields for lags 1..max_lag.

    Y(l) = (-A(l) + B(l)' x) / (l delta); the lag-1 entry is the spot rate
    1' x exactly.
    """
    x = _factor(state)
    if max_lag < 1:
        raise ValueError("max_lag must be >= 1")
    a_all = compute_A_all(params, max_lag)
    b_all = compute_B_all(params, max_lag)
    lags = np.arange(1, max_lag + 1)
    return (-a_all + b_all @ x) / (lags * params.delta)


def conditional_moments(params: VasicekParams, state, horizon: int):
    """Exact Gaussian conditional mean and covariance of X(t + horizon).

    mean(h) = b + beta mean(h-1) starting from x; covariance accumulates
    V(h) = beta V(h-1) beta' + sigma starting from V(0) = 0.
    """
    x = _factor(state)
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    mean = x.copy()
    cov = np.zeros((params.n, params.n))
    sigma = params.sigma
    for _ in range(horizon):
        mean = params.b + params.beta @ mean
        cov = params.beta @ cov @ params.beta.T + sigma
    return mean, cov


def simulate_factors(params: VasicekParams, state, horizon: int, rng) -> np.ndarray:
    """Simulate one path of the factor recursion; shape (horizon + 1, n),
    row 0 being the initial factor."""
    x = _factor(state)
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    gen = rng.generator if isinstance(rng, RngStream) else rng
    path = np.empty((horizon + 1, params.n))
    path[0] = x
    eps = gen.standard_normal((horizon, params.n))
    for t in range(horizon):
        path[t + 1] = params.b + params.beta @ path[t] + params.sigma_sqrt @ eps[t]
    return path
