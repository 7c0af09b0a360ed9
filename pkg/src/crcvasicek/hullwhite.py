"""Hull--White extension of the multifactor Vasicek model.

A time-shifted drift correction theta, acting on the first factor
component, bends the model curve to reproduce an arbitrary target yield
curve exactly.  Calibration reduces to a lower-triangular linear system
whose diagonal entries are all delta, solved by forward substitution.

The B coefficients are unaffected by theta; only A picks up extra
-B' theta(i) e_1 terms in its backward recursion.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import toeplitz

from .numerics import as_vector, solve_lower_triangular
from .vasicek import VasicekParams, compute_A, compute_B_all

__all__ = [
    "HullWhiteExtension",
    "CalibrationSystem",
    "build_calibration_system",
    "calibrate_theta",
    "theta_first",
    "extended_A",
    "extended_A_profile",
    "extended_yield_curve",
]


class ThetaRangeError(IndexError):
    """theta index outside the calibrated range; never silently zero."""


@dataclass(frozen=True)
class HullWhiteExtension:
    """Drift corrections theta(1..len) anchored at step ``anchor``."""

    anchor: int
    theta: np.ndarray

    def __post_init__(self):
        theta = as_vector(self.theta, "theta")
        if theta.size < 1:
            raise ValueError("theta must have length >= 1")
        object.__setattr__(self, "theta", theta)

    def theta_at(self, i: int) -> float:
        """theta(i), 1-based."""
        if i < 1 or i > self.theta.size:
            raise ThetaRangeError(
                f"theta index {i} outside calibrated range 1..{self.theta.size}"
            )
        return float(self.theta[i - 1])


@dataclass(frozen=True)
class CalibrationSystem:
    """Lower-triangular system C theta = z of size (M-1) x (M-1)."""

    c: np.ndarray
    z: np.ndarray


def build_calibration_system(
    params: VasicekParams, anchor: int, x, y
) -> CalibrationSystem:
    """Assemble the calibration system for target curve ``y`` of length M.

    C_{ij} = B_1(lag i+1-j) for j <= i, a lower-triangular Toeplitz matrix
    with constant diagonal delta.  z_i accumulates the convexity and drift
    partial sums of the B coefficients, the factor power sum
    1' (sum_{s<=i} beta^s) x and the target yield term (i+1) y_{i+1} delta.
    Assembly is O(M^2) time and memory.
    """
    x = as_vector(x, "factor")
    y = as_vector(y, "target curve")
    m = y.size
    if m < 2:
        raise ValueError("target curve must have length >= 2")
    n_sys = m - 1
    b_all = compute_B_all(params, n_sys)
    sigma = params.sigma

    c = toeplitz(b_all[:, 0], np.zeros(n_sys))

    # partial sums over lags 1..i of 0.5 B' sigma B - B' b
    quad = 0.5 * np.einsum("li,ij,lj->l", b_all, sigma, b_all) - b_all @ params.b
    quad_cum = np.cumsum(quad)

    # power sums 1' (sum_{s=0}^{i} beta^s) x for i = 1..M-1
    pow_term = np.empty(n_sys)
    v = x.copy()
    acc = float(np.sum(v))
    for i in range(n_sys):
        v = params.beta @ v
        acc += float(np.sum(v))
        pow_term[i] = acc

    idx = np.arange(1, n_sys + 1)
    z = quad_cum - pow_term * params.delta + (idx + 1) * y[1:] * params.delta
    return CalibrationSystem(c, z)


def calibrate_theta(params: VasicekParams, anchor: int, x, y) -> HullWhiteExtension:
    """Solve C theta = z by forward substitution.

    The extended model's curve at the anchor step then reproduces ``y``
    entrywise (the lag-1 entry is fixed by the factor as 1' x).
    """
    system = build_calibration_system(params, anchor, x, y)
    theta = solve_lower_triangular(system.c, system.z)
    return HullWhiteExtension(anchor=anchor, theta=theta)


def theta_first(params: VasicekParams, x, y2: float) -> float:
    """First drift correction theta(1) from the lag-2 yield alone, O(n):

    theta(1) = 0.5 1' sigma 1 delta - 1' b - 1' (1 + beta) x + 2 y2.
    """
    x = as_vector(x, "factor")
    ones = np.ones(params.n)
    return float(
        0.5 * ones @ params.sigma @ ones * params.delta
        - np.sum(params.b)
        - ones @ (x + params.beta @ x)
        + 2.0 * y2
    )


def extended_A(params: VasicekParams, hwx: HullWhiteExtension, t: int, m: int) -> float:
    """A coefficient of the extended model for times t < m, t >= anchor.

    Backward recursion from A(m-1, m) = 0 with drift b + theta(s - anchor) e1;
    reduces to the unextended A when theta is identically zero.
    """
    if not m > t >= hwx.anchor:
        raise ValueError("need m > t >= anchor")
    b_all = compute_B_all(params, m - t)
    sigma = params.sigma
    a = 0.0
    for s in range(m - 1, t, -1):
        bb = b_all[m - s - 1]
        drift = params.b.copy()
        drift[0] += hwx.theta_at(s - hwx.anchor)
        a = a - bb @ drift + 0.5 * bb @ sigma @ bb
    return float(a)


def extended_A_profile(
    params: VasicekParams, theta: np.ndarray, shift: int, max_lag: int
) -> np.ndarray:
    """A coefficients of the extended model at time t = anchor + shift for
    lags 1..max_lag, vectorized.

    A(lag j) = sum_{l<j} (-B(l)' b + 0.5 B(l)' sigma B(l))
               - sum_{u<j} B_1(j-u) theta(shift+u),
    the second sum a discrete convolution of B_1 with the shifted theta.
    Requires theta indices up to shift + max_lag - 1.
    """
    theta = as_vector(theta, "theta")
    if shift < 0:
        raise ValueError("shift must be >= 0")
    if max_lag < 1:
        raise ValueError("max_lag must be >= 1")
    if shift + max_lag - 1 > theta.size:
        raise ThetaRangeError(
            f"need theta up to index {shift + max_lag - 1}, have {theta.size}"
        )
    out = np.zeros(max_lag)
    if max_lag == 1:
        return out
    b_all = compute_B_all(params, max_lag - 1)
    sigma = params.sigma
    quad = -b_all @ params.b + 0.5 * np.einsum("li,ij,lj->l", b_all, sigma, b_all)
    out[1:] = np.cumsum(quad)
    th = theta[shift : shift + max_lag - 1]
    conv = np.convolve(b_all[:, 0], th)[: max_lag - 1]
    out[1:] -= conv
    return out


def extended_yield_curve(
    params: VasicekParams, hwx: HullWhiteExtension, state, t: int, max_lag: int
) -> np.ndarray:
    """Extended-model yields at step t >= anchor for lags 1..max_lag.

    The lag-1 entry equals the spot rate 1' x; with theta identically zero
    this coincides with the unextended curve.
    """
    from .vasicek import _factor

    x = _factor(state)
    if t < hwx.anchor:
        raise ValueError("t must be >= anchor")
    a_prof = extended_A_profile(params, hwx.theta, t - hwx.anchor, max_lag)
    b_all = compute_B_all(params, max_lag)
    lags = np.arange(1, max_lag + 1)
    return (-a_prof + b_all @ x) / (lags * params.delta)


def _unextended_check(params: VasicekParams, lag: int) -> float:
    # closed-form cross-check hook used by tests only
    return compute_A(params, lag)
