"""Heston-like stochastic volatility for the factor covariance process.

The diagonal variances follow a square-root autoregression

    v_i(t) = varphi_i + phi_ii v_i(t-1) + sqrt(v_i(t-1)) (Phi^{1/2} e~(t))_i,

floored at a small positive level, and the full covariance matrix is
assembled from the variances with fixed factor correlations.  The driver
e~ may be correlated with the factor innovations e; both are drawn jointly
Gaussian.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .numerics import (
    NotPositiveDefiniteError,
    as_matrix,
    as_vector,
    spd_sqrt,
)

__all__ = [
    "StochVolParams",
    "stochvol_step",
    "assemble_sigma",
    "fit_stochvol",
    "draw_joint_innovations",
    "VARIANCE_FLOOR",
]

# absorbing floor for the square-root recursion; keeps variances positive
VARIANCE_FLOOR = 1e-10


@dataclass(frozen=True)
class StochVolParams:
    """Volatility process parameters.

    varphi >= 0 drives the long-run level, phi_diag in (-1,1) the
    persistence, phi_sqrt the vol-of-vol.  corr_factors (unit diagonal,
    PSD) assembles the full covariance from the diagonal variances;
    cross_corr holds Cor[e_i, e~_j] between factor and volatility
    innovations (zeroed when ``use_cross_corr`` is off).
    """

    varphi: np.ndarray
    phi_diag: np.ndarray
    phi_sqrt: np.ndarray
    corr_factors: np.ndarray = None
    cross_corr: np.ndarray = None
    use_cross_corr: bool = True

    def __post_init__(self):
        varphi = as_vector(self.varphi, "varphi")
        phi_diag = as_vector(self.phi_diag, "phi_diag")
        phi_sqrt = as_matrix(self.phi_sqrt, "phi_sqrt")
        n = varphi.size
        if np.any(varphi < 0):
            raise ValueError("varphi must be nonnegative")
        if np.any(np.abs(phi_diag) >= 1.0):
            raise ValueError("phi diagonal entries must lie in (-1, 1)")
        corr = self.corr_factors
        corr = np.eye(n) if corr is None else as_matrix(corr, "corr_factors")
        if np.max(np.abs(np.diag(corr) - 1.0)) > 1e-12:
            raise ValueError("corr_factors must have unit diagonal")
        if np.max(np.abs(corr - corr.T)) > 1e-12:
            raise ValueError("corr_factors must be symmetric")
        if np.min(np.linalg.eigvalsh(corr)) < -1e-12:
            raise ValueError("corr_factors must be positive semi-definite")
        cross = self.cross_corr
        cross = np.zeros((n, n)) if cross is None else as_matrix(cross, "cross_corr")
        object.__setattr__(self, "varphi", varphi)
        object.__setattr__(self, "phi_diag", phi_diag)
        object.__setattr__(self, "phi_sqrt", phi_sqrt)
        object.__setattr__(self, "corr_factors", corr)
        object.__setattr__(self, "cross_corr", cross)

    @property
    def n(self) -> int:
        return self.varphi.size

    def stationary_variances(self) -> np.ndarray:
        """Deterministic fixed point varphi / (1 - phi), entrywise."""
        return self.varphi / (1.0 - self.phi_diag)


def stochvol_step(params: StochVolParams, variances, eps_tilde) -> np.ndarray:
    """Advance the diagonal variances one step; output floored positive.

    Vectorizes over leading axes: ``variances`` and ``eps_tilde`` may be
    (n,) or (paths, n).
    """
    v = np.asarray(variances, dtype=float)
    if np.any(v <= 0.0):
        raise ValueError("current variances must be strictly positive")
    e = np.asarray(eps_tilde, dtype=float)
    shock = np.sqrt(v) * (e @ params.phi_sqrt.T)
    out = params.varphi + params.phi_diag * v + shock
    return np.maximum(out, VARIANCE_FLOOR)


def assemble_sigma(variances, corr_factors):
    """Covariance sigma_ij = rho_ij sqrt(v_i v_j) and its Cholesky root."""
    v = as_vector(variances, "variances")
    if np.any(v <= 0.0):
        raise ValueError("variances must be strictly positive")
    rho = as_matrix(corr_factors, "corr_factors")
    vol = np.sqrt(v)
    sigma = rho * np.outer(vol, vol)
    try:
        root = spd_sqrt(sigma)
    except NotPositiveDefiniteError as exc:
        smallest = float(np.min(np.linalg.eigvalsh(sigma)))
        raise ValueError(
            f"assembled covariance not positive definite (smallest eigenvalue {smallest:.3e})"
        ) from exc
    return sigma, root


def fit_stochvol(
    variance_series,
    factor_residuals=None,
    corr_factors=None,
    use_cross_corr: bool = True,
) -> StochVolParams:
    """Least-squares estimation from a (T, n) variance series.

    Per component, regress v_i(t) / sqrt(v_i(t-1)) on
    (1 / sqrt(v_i(t-1)), sqrt(v_i(t-1))) to get (varphi_i, phi_ii); the
    vol-of-vol Phi comes from the residual sample covariance, and the
    cross correlations with ``factor_residuals`` from the residual sample
    correlation.
    """
    series = np.atleast_2d(np.asarray(variance_series, dtype=float))
    t_len, n = series.shape
    if t_len < 3:
        raise ValueError("variance series too short")
    if np.any(series <= 0.0):
        raise ValueError("variance series must be strictly positive")

    prev = series[:-1]
    curr = series[1:]
    varphi = np.empty(n)
    phi_diag = np.empty(n)
    resid = np.empty_like(prev)
    for i in range(n):
        sq = np.sqrt(prev[:, i])
        design = np.column_stack([1.0 / sq, sq])
        if np.linalg.matrix_rank(design) < 2:
            raise ValueError(f"rank-deficient regression for component {i} (constant variances)")
        target = curr[:, i] / sq
        coef, *_ = np.linalg.lstsq(design, target, rcond=None)
        varphi[i], phi_diag[i] = coef
        resid[:, i] = target - design @ coef

    phi = np.cov(resid, rowvar=False).reshape(n, n)
    phi_sqrt = spd_sqrt(phi + 1e-18 * np.eye(n))

    cross = None
    if factor_residuals is not None:
        fr = np.atleast_2d(np.asarray(factor_residuals, dtype=float))
        k = min(fr.shape[0], resid.shape[0])
        stacked = np.corrcoef(np.column_stack([fr[:k], resid[:k]]), rowvar=False)
        cross = stacked[:n, n:]

    return StochVolParams(
        varphi=np.maximum(varphi, 0.0),
        phi_diag=np.clip(phi_diag, -0.999999, 0.999999),
        phi_sqrt=phi_sqrt,
        corr_factors=corr_factors,
        cross_corr=cross,
        use_cross_corr=use_cross_corr,
    )


def draw_joint_innovations(params: StochVolParams, gen: np.random.Generator, size: int):
    """Draw ``size`` jointly-Gaussian (eps, eps_tilde) pairs, each (size, n).

    The 2n x 2n correlation couples eps and eps_tilde through cross_corr;
    with ``use_cross_corr`` off (or zero cross_corr) the draws are
    independent standard normals.
    """
    n = params.n
    cross = params.cross_corr if params.use_cross_corr else np.zeros((n, n))
    if not np.any(cross):
        z = gen.standard_normal((size, 2 * n))
        return z[:, :n], z[:, n:]
    corr = np.block([[np.eye(n), cross], [cross.T, np.eye(n)]])
    try:
        root = spd_sqrt(corr)
    except NotPositiveDefiniteError as exc:
        raise ValueError("cross correlations give a non-PD joint correlation") from exc
    z = gen.standard_normal((size, 2 * n)) @ root.T
    return z[:, :n], z[:, n:]
