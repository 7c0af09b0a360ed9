"""Consistent re-calibration (CRC) engine.

Evolves a yield curve by concatenating one-step increments of Hull--White
extended Vasicek models with (possibly) time-varying parameters.  Each step
re-calibrates the drift extension so the prevailing curve is left unchanged
by the parameter update, preserving no-arbitrage.

Two equivalent stepping routes are provided: the explicit route, which
calibrates theta and re-prices through the extended affine coefficients,
and the HJM route, which updates the curve directly from its own entries
and never computes theta.  Their agreement is the engine's central
invariant and is exercised heavily by the test suite.

The curve length M is held fixed; a step that needs the lag M+1 yield of
the old curve extends it flat (constant yield beyond the last maturity).
Flat-yield extrapolation is isolated in :func:`flat_extend` so alternative
rules can be swapped in.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .hullwhite import (
    HullWhiteExtension,
    calibrate_theta,
    extended_A_profile,
    extended_yield_curve,
    theta_first,
)
from .numerics import as_matrix, as_vector, stationary_check
from .vasicek import VasicekParams, compute_B_all

__all__ = [
    "CrcState",
    "ParameterUpdate",
    "crc_init",
    "crc_step_explicit",
    "crc_step_hjm",
    "crc_step_real_world",
    "density_process",
    "flat_extend",
    "verify_recalibration",
    "path_to_csv",
]


@dataclass(frozen=True)
class CrcState:
    """Per-step state: factor, current parameters, drift extension (absent
    after an HJM step, where it stays encoded in the curve) and the
    prevailing curve of fixed length M."""

    k: int
    x: np.ndarray
    params: VasicekParams
    curve: np.ndarray
    hwx: Optional[HullWhiteExtension] = None

    def __post_init__(self):
        object.__setattr__(self, "x", as_vector(self.x, "factor"))
        object.__setattr__(self, "curve", as_vector(self.curve, "curve"))

    @property
    def m(self) -> int:
        return self.curve.size

    @property
    def spot_rate(self) -> float:
        return float(np.sum(self.x))


@dataclass(frozen=True)
class ParameterUpdate:
    """New model parameters for the next step, optionally with market price
    of risk (lam, Lam) for stepping under the real-world measure."""

    params: VasicekParams
    lam: Optional[np.ndarray] = None
    Lam: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.lam is not None:
            object.__setattr__(self, "lam", as_vector(self.lam, "lam"))
        if self.Lam is not None:
            object.__setattr__(self, "Lam", as_matrix(self.Lam, "Lam"))


def flat_extend(curve: np.ndarray) -> np.ndarray:
    """Append one entry, repeating the last yield (flat extrapolation)."""
    return np.append(curve, curve[-1])


def crc_init(params: VasicekParams, x0, y) -> CrcState:
    """Start the algorithm: calibrate theta to the observed curve so the
    model reproduces it identically at step 0."""
    x0 = as_vector(x0, "initial factor")
    y = as_vector(y, "initial curve")
    if y.size < 2:
        raise ValueError("initial curve must have length >= 2")
    hwx = calibrate_theta(params, 0, x0, y)
    return CrcState(k=0, x=x0, params=params, curve=y.copy(), hwx=hwx)


def _theta_extended(state: CrcState) -> np.ndarray:
    """theta over the flat-extended curve (length M), under the state's own
    parameters.  Recovers theta from the curve when the state carries none."""
    y_ext = flat_extend(state.curve)
    return calibrate_theta(state.params, state.k, state.x, y_ext).theta


def crc_step_explicit(state: CrcState, update: ParameterUpdate, eps_star) -> CrcState:
    """One CRC step via the extended affine coefficients.

    (a) advances the factor under the old parameters and their calibrated
    theta, (b) prices the new curve from the old model's coefficients,
    (c) re-calibrates theta under the new parameters; step (c) leaves the
    curve unchanged by construction.
    """
    eps_star = as_vector(eps_star, "innovation")
    old = state.params
    m = state.m
    theta = _theta_extended(state)

    x_new = old.b + old.beta @ state.x + old.sigma_sqrt @ eps_star
    x_new[0] += theta[0]

    a_prof = extended_A_profile(old, theta, shift=1, max_lag=m)
    b_all = compute_B_all(old, m)
    lags = np.arange(1, m + 1)
    curve_new = (-a_prof + b_all @ x_new) / (lags * old.delta)

    hwx_new = calibrate_theta(update.params, state.k + 1, x_new, curve_new)
    return CrcState(
        k=state.k + 1, x=x_new, params=update.params, curve=curve_new, hwx=hwx_new
    )


def _hjm_curve(
    params: VasicekParams, curve: np.ndarray, drift_shift: np.ndarray
) -> np.ndarray:
    """Shared HJM curve update given the per-lag drift/shock term
    ``drift_shift[j-1] = 0.5 B(j)' sigma B(j) + B(j)' sigma_sqrt (...)``."""
    m = curve.size
    y_ext = flat_extend(curve)
    lags = np.arange(1, m + 1)
    num = y_ext[1:] * (lags + 1) * params.delta - curve[0] * params.delta + drift_shift
    return num / (lags * params.delta)


def crc_step_hjm(state: CrcState, update: ParameterUpdate, eps_star) -> CrcState:
    """One CRC step via the HJM curve recursion; theta is never computed.

    The factor step needs only theta(1), which is recovered from the lag-2
    yield in O(n).  The returned state carries no drift extension; it stays
    encoded in the curve.
    """
    eps_star = as_vector(eps_star, "innovation")
    old = state.params
    m = state.m
    b_all = compute_B_all(old, m)
    sigma = old.sigma
    quad = 0.5 * np.einsum("li,ij,lj->l", b_all, sigma, b_all)
    shock = b_all @ (old.sigma_sqrt @ eps_star)
    curve_new = _hjm_curve(old, state.curve, quad + shock)

    th1 = theta_first(old, state.x, state.curve[1])
    x_new = old.b + old.beta @ state.x + old.sigma_sqrt @ eps_star
    x_new[0] += th1
    return CrcState(
        k=state.k + 1, x=x_new, params=update.params, curve=curve_new, hwx=None
    )


def crc_step_real_world(state: CrcState, update: ParameterUpdate, eps) -> CrcState:
    """One CRC step under the real-world measure.

    Adds the market-price-of-risk drift terms -B' sigma_sqrt lam and
    -B' sigma_sqrt Lam x to the HJM update and advances the factor with
    a = b + theta(1) e1 - sigma_sqrt lam and alpha = beta - sigma_sqrt Lam.
    With lam = Lam = 0 this is identical to :func:`crc_step_hjm`.
    """
    eps = as_vector(eps, "innovation")
    old = state.params
    n = old.n
    lam = update.lam if update.lam is not None else np.zeros(n)
    big_lam = update.Lam if update.Lam is not None else np.zeros((n, n))

    alpha = old.beta - old.sigma_sqrt @ big_lam
    if not stationary_check(alpha):
        raise ValueError("beta - sigma_sqrt @ Lam must have spectrum inside (-1, 1)")

    m = state.m
    b_all = compute_B_all(old, m)
    sigma = old.sigma
    quad = 0.5 * np.einsum("li,ij,lj->l", b_all, sigma, b_all)
    shift = old.sigma_sqrt @ (eps - lam - big_lam @ state.x)
    curve_new = _hjm_curve(old, state.curve, quad + b_all @ shift)

    th1 = theta_first(old, state.x, state.curve[1])
    x_new = old.b - old.sigma_sqrt @ lam + alpha @ state.x + old.sigma_sqrt @ eps
    x_new[0] += th1
    return CrcState(
        k=state.k + 1, x=x_new, params=update.params, curve=curve_new, hwx=None
    )


def density_process(factors, lams, Lams, eps_stars) -> np.ndarray:
    """Change-of-measure density path xi(0..K), with xi(0) = 1.

    xi(k) = exp{ -1/2 sum_{s<k} ||lam(s) + Lam(s) x(s)||^2
                 + sum_{s<k} (lam(s) + Lam(s) x(s))' eps*(s+1) }.
    """
    factors = np.atleast_2d(np.asarray(factors, dtype=float))
    lams = np.atleast_2d(np.asarray(lams, dtype=float))
    Lams = np.asarray(Lams, dtype=float)
    eps_stars = np.atleast_2d(np.asarray(eps_stars, dtype=float))
    k = eps_stars.shape[0]
    if not (factors.shape[0] >= k and lams.shape[0] >= k and Lams.shape[0] >= k):
        raise ValueError("inconsistent path lengths")
    mpr = lams[:k] + np.einsum("sij,sj->si", Lams[:k], factors[:k])
    increments = -0.5 * np.sum(mpr**2, axis=1) + np.sum(mpr * eps_stars, axis=1)
    return np.exp(np.concatenate([[0.0], np.cumsum(increments)]))


def verify_recalibration(state: CrcState) -> float:
    """Max abs difference between the stored curve and the curve re-priced
    from (x, params, theta).  Zero up to round-off when the state is
    consistent; the lag-1 entry is compared against the spot rate."""
    hwx = state.hwx
    if hwx is None:
        hwx = calibrate_theta(state.params, state.k, state.x, state.curve)
    repriced = extended_yield_curve(state.params, hwx, state.x, state.k, state.m)
    return float(np.max(np.abs(repriced - state.curve)))


def path_to_csv(states, path) -> None:
    """One row per step: k, factor components, curve entries."""
    states = list(states)
    if not states:
        raise ValueError("empty path")
    n = states[0].params.n
    m = states[0].m
    header = ["k"] + [f"x{i + 1}" for i in range(n)] + [
        f"y{j + 1}" for j in range(m)
    ]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for s in states:
            writer.writerow(
                [s.k] + [repr(float(v)) for v in s.x] + [repr(float(v)) for v in s.curve]
            )
