"""Per-window parameter inference.

The factor is hidden; observed yields are the model curve plus Gaussian
measurement noise S^{1/2} eta.  On a rolling window of length K the
pipeline is:

1. realized covariations of yield increments -> cross-sectional least
   squares for (beta, sigma) under the risk-neutral measure;
2. Kalman-filter likelihood maximization for the drifts (b, a) and the
   real-world mean reversion alpha, holding (beta, sigma) fixed;
3. market price of risk from lam = sigma^{-1/2} (b - a) and
   Lam = sigma^{-1/2} (beta - alpha).

beta and alpha are restricted to diagonal form here; constraints are kept
out of the optimizer by tanh (mean reversion) and exp (volatility
diagonal) reparameterizations.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve_triangular

from .numerics import as_matrix, as_vector, nelder_mead, spd_sqrt
from .vasicek import VasicekParams, compute_A_all, compute_B_all

logger = logging.getLogger(__name__)

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def deco(fn):
            return fn

        return deco if not (args and callable(args[0])) else args[0]


__all__ = [
    "StateSpaceSpec",
    "FilterPath",
    "EstimationResult",
    "build_state_space",
    "kalman_filter",
    "realized_cov",
    "realized_cov_matrix",
    "rcov_model_matrix",
    "fit_beta_sigma_rcov",
    "rescale_grid",
    "fit_drift_mle",
    "infer_market_price",
    "rolling_estimate",
    "results_to_csv",
    "DEFAULT_TAUS",
    "DEFAULT_WINDOW",
    "DEFAULT_NOISE_SCALE",
]

# default presets: tau grid (steps), window length, measurement noise scale
DEFAULT_TAUS = (1, 2, 5, 10, 21, 63)
DEFAULT_WINDOW = 126
DEFAULT_NOISE_SCALE = 1e-5


class FilterSingularError(np.linalg.LinAlgError):
    def __init__(self, k: int):
        self.k = k
        super().__init__(f"prediction covariance numerically singular at step {k}")


@dataclass(frozen=True)
class StateSpaceSpec:
    """Linear-Gaussian state space: transition (a, alpha, sigma_sqrt) under
    the real-world measure, measurement (d, D, S) built from the
    risk-neutral affine coefficients on the tau grid."""

    a: np.ndarray
    alpha: np.ndarray
    sigma_sqrt: np.ndarray
    d: np.ndarray
    D: np.ndarray
    S: np.ndarray
    taus: np.ndarray

    @property
    def n(self) -> int:
        return self.a.size

    @property
    def sigma(self) -> np.ndarray:
        return self.sigma_sqrt @ self.sigma_sqrt.T


@dataclass
class FilterPath:
    """Kalman filter trajectories: one-step predictions, posteriors,
    innovations and gains."""

    x_pred: np.ndarray
    p_pred: np.ndarray
    x_filt: np.ndarray
    p_filt: np.ndarray
    innovations: np.ndarray
    f: np.ndarray
    gains: np.ndarray


def _measurement_coeffs(params: VasicekParams, taus: np.ndarray):
    max_tau = int(taus.max())
    a_all = compute_A_all(params, max_tau)
    b_all = compute_B_all(params, max_tau)
    scale = taus * params.delta
    d = -a_all[taus - 1] / scale
    big_d = b_all[taus - 1] / scale[:, None]
    return d, big_d


def build_state_space(
    params: VasicekParams, a, alpha, taus, noise_cov
) -> StateSpaceSpec:
    """Assemble the spec from risk-neutral parameters (measurement side) and
    real-world transition (a, alpha)."""
    taus = np.asarray(taus, dtype=int)
    d, big_d = _measurement_coeffs(params, taus)
    s = as_matrix(noise_cov, "S")
    return StateSpaceSpec(
        a=as_vector(a, "a"),
        alpha=as_matrix(alpha, "alpha"),
        sigma_sqrt=params.sigma_sqrt,
        d=d,
        D=big_d,
        S=s,
        taus=taus,
    )


def kalman_filter(spec: StateSpaceSpec, observations, x_init):
    """Run the filter over a (K, M) panel of observations.

    Anchoring: x(1|0) = a + alpha x_init with covariance sigma.  Returns the
    full :class:`FilterPath` and the Gaussian log-likelihood

        sum_k -1/2 [M log 2 pi + log det F(k) + zeta(k)' F(k)^{-1} zeta(k)],

    with F(k)^{-1} applied through a Cholesky factorization.
    """
    obs = np.atleast_2d(np.asarray(observations, dtype=float))
    x_init = as_vector(x_init, "x_init")
    kk, m = obs.shape
    n = spec.n
    sigma = spec.sigma

    path = FilterPath(
        x_pred=np.empty((kk, n)),
        p_pred=np.empty((kk, n, n)),
        x_filt=np.empty((kk, n)),
        p_filt=np.empty((kk, n, n)),
        innovations=np.empty((kk, m)),
        f=np.empty((kk, m, m)),
        gains=np.empty((kk, n, m)),
    )

    x_pred = spec.a + spec.alpha @ x_init
    p_pred = sigma.copy()
    loglik = 0.0
    log2pi = np.log(2.0 * np.pi)
    for k in range(kk):
        f = spec.D @ p_pred @ spec.D.T + spec.S
        zeta = obs[k] - spec.d - spec.D @ x_pred
        try:
            cho = cho_factor(f, lower=True)
        except np.linalg.LinAlgError as exc:
            raise FilterSingularError(k) from exc
        logdet = 2.0 * np.sum(np.log(np.diag(cho[0])))
        fi_zeta = cho_solve(cho, zeta)
        loglik += -0.5 * (m * log2pi + logdet + zeta @ fi_zeta)
        gain = cho_solve(cho, spec.D @ p_pred).T
        x_filt = x_pred + gain @ zeta
        p_filt = (np.eye(n) - gain @ spec.D) @ p_pred

        path.x_pred[k], path.p_pred[k] = x_pred, p_pred
        path.x_filt[k], path.p_filt[k] = x_filt, p_filt
        path.innovations[k], path.f[k], path.gains[k] = zeta, f, gain

        x_pred = spec.a + spec.alpha @ x_filt
        p_pred = spec.alpha @ p_filt @ spec.alpha.T + sigma
    return path, float(loglik)


@njit(cache=True)
def _kalman_loglik_core(obs, a, alpha, sigma, d, big_d, s, x_init):  # pragma: no cover
    kk, m = obs.shape
    n = a.shape[0]
    x_pred = a + alpha @ x_init
    p_pred = sigma.copy()
    loglik = 0.0
    log2pi = np.log(2.0 * np.pi)
    eye = np.eye(n)
    # the covariance recursion does not depend on the data; once p_pred
    # reaches its fixed point (relative change below 1e-13), gain,
    # determinant and inverse are frozen and the remaining steps only
    # propagate the mean
    steady = False
    f_inv = np.zeros((m, m))
    gain = np.zeros((n, m))
    logdet = 0.0
    k = 0
    while k < kk and not steady:
        f = big_d @ p_pred @ big_d.T + s
        zeta = obs[k] - d - big_d @ x_pred
        low = np.linalg.cholesky(f)
        logdet = 0.0
        for i in range(m):
            logdet += 2.0 * np.log(low[i, i])
        fi_zeta = np.linalg.solve(f, zeta)
        loglik += -0.5 * (m * log2pi + logdet + zeta @ fi_zeta)
        gain = np.linalg.solve(f, big_d @ p_pred).T
        x_filt = x_pred + gain @ zeta
        p_filt = (eye - gain @ big_d) @ p_pred
        x_pred = a + alpha @ x_filt
        p_next = alpha @ p_filt @ alpha.T + sigma
        maxdiff = 0.0
        maxp = 0.0
        for i in range(n):
            for j in range(n):
                dp = abs(p_next[i, j] - p_pred[i, j])
                ap = abs(p_pred[i, j])
                if dp > maxdiff:
                    maxdiff = dp
                if ap > maxp:
                    maxp = ap
        steady = maxdiff <= 1e-13 * maxp
        p_pred = p_next
        k += 1
    if k < kk:
        f_inv = np.linalg.inv(big_d @ p_pred @ big_d.T + s)
        for k in range(k, kk):
            zeta = obs[k] - d - big_d @ x_pred
            loglik += -0.5 * (m * log2pi + logdet + zeta @ (f_inv @ zeta))
            x_pred = a + alpha @ (x_pred + gain @ zeta)
    return loglik, x_pred


def kalman_loglik(spec: StateSpaceSpec, observations, x_init) -> float:
    """Log-likelihood only; jit-compiled fast path used inside MLE loops."""
    obs = np.ascontiguousarray(np.atleast_2d(np.asarray(observations, dtype=float)))
    ll, _ = _kalman_loglik_core(
        obs,
        np.ascontiguousarray(spec.a),
        np.ascontiguousarray(spec.alpha),
        np.ascontiguousarray(spec.sigma),
        np.ascontiguousarray(spec.d),
        np.ascontiguousarray(spec.D),
        np.ascontiguousarray(spec.S),
        np.ascontiguousarray(np.asarray(x_init, dtype=float)),
    )
    return float(ll)


def realized_cov(series_i, series_j) -> float:
    """Windowed average of increment products:

    (1/K) sum_k (y_i(k) - y_i(k-1)) (y_j(k) - y_j(k-1)),

    over the K increments of the supplied series (length K + 1).
    """
    yi = as_vector(series_i, "series_i")
    yj = as_vector(series_j, "series_j")
    if yi.size != yj.size:
        raise ValueError("series must have equal length")
    if yi.size < 2:
        raise ValueError("need at least one increment")
    return float(np.mean(np.diff(yi) * np.diff(yj)))


def realized_cov_matrix(window_panel) -> np.ndarray:
    """Realized covariation matrix of a (K+1, M) yield window."""
    panel = np.atleast_2d(np.asarray(window_panel, dtype=float))
    if panel.shape[0] < 2:
        raise ValueError("need at least one increment")
    inc = np.diff(panel, axis=0)
    return inc.T @ inc / inc.shape[0]


def rcov_model_matrix(beta_diag, sigma, taus) -> np.ndarray:
    """Model yield-increment covariances on the tau grid:

    g_ij = (1 / tau_i tau_j) u(tau_i)' sigma u(tau_j),
    u(tau) = (1 - beta^tau) (1 - beta)^{-1} 1  (entrywise geometric sums).
    """
    beta_diag = as_vector(beta_diag, "beta_diag")
    sigma = as_matrix(sigma, "sigma")
    taus = np.asarray(taus, dtype=float)
    # u[a, i] = sum_{s < tau_a} beta_i^s
    u = (1.0 - beta_diag[None, :] ** taus[:, None]) / (1.0 - beta_diag[None, :])
    g = u @ sigma @ u.T
    return g / np.outer(taus, taus)


@dataclass
class FitDiagnostics:
    objective: float
    converged: bool
    iterations: int
    n_starts: int = 1
    message: str = ""


def _unpack_sigma_sqrt(p: np.ndarray, n: int) -> np.ndarray:
    low = np.zeros((n, n))
    low[np.diag_indices(n)] = np.exp(p[:n])
    if n > 1:
        low[np.tril_indices(n, -1)] = p[n:]
    return low


def _pack_sigma_sqrt(low: np.ndarray) -> np.ndarray:
    n = low.shape[0]
    p = np.empty(n * (n + 1) // 2)
    p[:n] = np.log(np.diag(low))
    if n > 1:
        p[n:] = low[np.tril_indices(n, -1)]
    return p


def fit_beta_sigma_rcov(
    rcov,
    taus,
    weights,
    n: int,
    n_starts: int = 8,
    seed: int = 0,
    x0=None,
    max_iter: int = 20_000,
):
    """Weighted least squares of realized against model covariations over
    diagonal beta in (-1,1)^n and SPD sigma.

    beta_ii = tanh(u_i) and the sigma_sqrt diagonal is exp-positive, so the
    optimizer runs unconstrained.  Multi-start (fixed seed) Nelder--Mead;
    the fitted factors are sorted by descending beta_ii to pin the ordering.

    Returns (beta_diag, sigma_sqrt, diagnostics).
    """
    rcov = as_matrix(rcov, "rcov")
    taus = np.asarray(taus, dtype=int)
    w = as_matrix(weights, "weights")
    m = taus.size
    if rcov.shape != (m, m) or w.shape != (m, m):
        raise ValueError("rcov/weights shape must match the tau grid")
    if np.any(w < 0) or np.max(np.abs(w - w.T)) > 0:
        raise ValueError("weights must be symmetric and nonnegative")
    if n > m:
        raise ValueError("more factors than tau points")

    # normalize residuals so the objective is O(1); raw covariances are
    # ~1e-6 and their squares would sit below the optimizer's spread
    # tolerance from the first iterate
    obj_scale = max(float(np.max(np.abs(rcov))), 1e-300)

    def objective(p):
        beta_diag = np.tanh(p[:n])
        # tanh saturates to exactly 1.0 for |u| > ~19, which would blow up
        # the geometric-sum ratio; steer the search back with a penalty
        if np.any(np.abs(beta_diag) >= 1.0 - 1e-12):
            return 1e6 * (1.0 + float(np.sum(p**2)))
        low = _unpack_sigma_sqrt(p[n:], n)
        g = rcov_model_matrix(beta_diag, low @ low.T, taus)
        return float(np.sum(w * ((rcov - g) / obj_scale) ** 2))

    scale = np.sqrt(max(np.mean(np.diag(rcov)), 1e-16))
    starts = []
    if x0 is not None:
        starts.append(np.asarray(x0, dtype=float))
    base = np.concatenate(
        [
            np.arctanh(np.linspace(0.95, 0.3, n)),
            np.full(n, np.log(scale)),
            np.zeros(n * (n - 1) // 2),
        ]
    )
    starts.append(base)
    gen = np.random.default_rng(seed)
    while len(starts) < n_starts:
        p = base.copy()
        p[:n] = np.arctanh(gen.uniform(-0.5, 0.99, size=n))
        p[n : 2 * n] += gen.normal(scale=1.0, size=n)
        starts.append(p)

    best = None
    iterations = 0
    any_converged = False
    for p0 in starts:
        res = nelder_mead(objective, p0, max_iter=max_iter)
        iterations += res.iterations
        any_converged = any_converged or res.converged
        if best is None or res.fun < best.fun:
            best = res
    # polish: restart from the incumbent until the objective stops moving
    for _ in range(3):
        res = nelder_mead(objective, best.x, max_iter=max_iter)
        iterations += res.iterations
        if res.fun >= best.fun * (1.0 - 1e-10):
            best = res if res.fun < best.fun else best
            break
        best = res

    beta_diag = np.tanh(best.x[:n])
    low = _unpack_sigma_sqrt(best.x[n:], n)
    # pin factor ordering: sort by descending persistence, then restore a
    # lower-triangular root of the permuted sigma via QR (robust to a
    # numerically semidefinite factorization)
    order = np.argsort(-beta_diag, kind="stable")
    beta_diag = beta_diag[order]
    _, r = np.linalg.qr(low[order].T)
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    sigma_sqrt = (r * signs[:, None]).T
    diag = FitDiagnostics(
        objective=best.fun,
        converged=any_converged,
        iterations=iterations,
        n_starts=len(starts),
    )
    if not any_converged:
        logger.warning("fit_beta_sigma_rcov: no start converged")
    return beta_diag, sigma_sqrt, diag


def rescale_grid(mu, gamma_diag, big_gamma, d: int):
    """Recover fine-grid parameters (c, D, Psi) from coarse-grid (mu, gamma,
    Gamma) estimated on a grid d times coarser.

    Exact finite-d formulas: D = gamma^{1/d},
    c = (1 - gamma)^{-1} (1 - gamma^{1/d}) mu, and
    Psi_ij = Gamma_ij (1 - (g_ii g_jj)^{1/d}) / (1 - g_ii g_jj).
    Composing d one-step transitions with (c, D, Psi) reproduces the inputs.
    Diagonal entries of gamma must lie in (0, 1) for real d-th roots.
    """
    mu = as_vector(mu, "mu")
    gamma = as_vector(gamma_diag, "gamma_diag")
    big_gamma = as_matrix(big_gamma, "Gamma")
    if d < 1:
        raise ValueError("d must be >= 1")
    if np.any(gamma <= 0.0) or np.any(gamma >= 1.0):
        raise ValueError("gamma diagonal entries must lie in (0, 1)")
    d_diag = gamma ** (1.0 / d)
    c = (1.0 - d_diag) / (1.0 - gamma) * mu
    prod = np.outer(gamma, gamma)
    psi = big_gamma * (1.0 - prod ** (1.0 / d)) / (1.0 - prod)
    return c, d_diag, psi


@dataclass
class DriftMleResult:
    b: np.ndarray
    a: np.ndarray
    alpha_diag: np.ndarray
    loglik: float
    diagnostics: FitDiagnostics = field(default_factory=lambda: FitDiagnostics(0.0, True, 0))


def fit_drift_mle(
    observations,
    beta_diag,
    sigma_sqrt,
    taus,
    delta: float,
    noise_cov,
    x_init,
    b0=None,
    a0=None,
    alpha0=None,
    tol: float = 1e-6,
    max_outer: int = 50,
    max_iter: int = 4_000,
) -> DriftMleResult:
    """Maximize the filter likelihood over b, a and diagonal alpha with
    (beta, sigma) held fixed.

    The measurement intercept d depends on b through the risk-neutral A
    coefficients and is rebuilt on every evaluation; the transition uses
    (a, alpha).  alpha is tanh-reparameterized.  Optimization restarts from
    its own optimum until the parameter sup-norm change drops below ``tol``
    (EM-style alternation with the filter), at most ``max_outer`` rounds.
    """
    obs = np.atleast_2d(np.asarray(observations, dtype=float))
    beta_diag = as_vector(beta_diag, "beta_diag")
    sigma_sqrt = as_matrix(sigma_sqrt, "sigma_sqrt")
    taus = np.asarray(taus, dtype=int)
    noise_cov = as_matrix(noise_cov, "S")
    x_init = as_vector(x_init, "x_init")
    n = beta_diag.size

    def unpack(p):
        return p[:n], p[n : 2 * n], np.tanh(p[2 * n :])

    def objective(p):
        b, a, alpha_diag = unpack(p)
        try:
            params = VasicekParams(b, np.diag(beta_diag), sigma_sqrt, delta)
            spec = build_state_space(params, a, np.diag(alpha_diag), taus, noise_cov)
            return -kalman_loglik(spec, obs, x_init)
        except np.linalg.LinAlgError:
            return 1e300

    b0 = np.zeros(n) if b0 is None else np.asarray(b0, dtype=float)
    a0 = np.zeros(n) if a0 is None else np.asarray(a0, dtype=float)
    alpha0 = beta_diag.copy() if alpha0 is None else np.asarray(alpha0, dtype=float)
    p = np.concatenate([b0, a0, np.arctanh(np.clip(alpha0, -0.999999, 0.999999))])

    total_iters = 0
    converged = False
    res = None
    for _ in range(max_outer):
        res = nelder_mead(objective, p, max_iter=max_iter)
        total_iters += res.iterations
        if np.max(np.abs(res.x - p)) < tol:
            p = res.x
            converged = True
            break
        p = res.x

    b, a, alpha_diag = unpack(p)
    return DriftMleResult(
        b=b.copy(),
        a=a.copy(),
        alpha_diag=alpha_diag.copy(),
        loglik=-res.fun,
        diagnostics=FitDiagnostics(res.fun, converged, total_iters),
    )


def infer_market_price(b, a, beta, alpha, sigma_sqrt):
    """Market price of risk from the measure-change identities:

    lam = sigma^{-1/2} (b - a),  Lam = sigma^{-1/2} (beta - alpha),
    both solved against the triangular sigma_sqrt.
    """
    b = as_vector(b, "b")
    a = as_vector(a, "a")
    beta = np.diag(as_vector(beta)) if np.ndim(beta) == 1 else as_matrix(beta)
    alpha = np.diag(as_vector(alpha)) if np.ndim(alpha) == 1 else as_matrix(alpha)
    sigma_sqrt = as_matrix(sigma_sqrt, "sigma_sqrt")
    if np.any(np.diag(sigma_sqrt) == 0.0):
        raise ZeroDivisionError("sigma_sqrt is singular")
    lam = solve_triangular(sigma_sqrt, b - a, lower=True)
    big_lam = solve_triangular(sigma_sqrt, beta - alpha, lower=True)
    return lam, big_lam


@dataclass
class EstimationResult:
    """One rolling window's estimates plus filter diagnostics."""

    t: int
    b: Optional[np.ndarray] = None
    beta_diag: Optional[np.ndarray] = None
    sigma_sqrt: Optional[np.ndarray] = None
    a: Optional[np.ndarray] = None
    alpha_diag: Optional[np.ndarray] = None
    lam: Optional[np.ndarray] = None
    Lam: Optional[np.ndarray] = None
    loglik: float = np.nan
    converged: bool = False
    error: Optional[str] = None


def rolling_estimate(
    panel,
    window: int,
    n: int,
    taus=DEFAULT_TAUS,
    delta: float = 1.0 / 252.0,
    noise_scale: float = DEFAULT_NOISE_SCALE,
    stride: int = 1,
    weights=None,
    rcov_starts: int = 8,
    seed: int = 0,
) -> list[EstimationResult]:
    """Slide a length-``window`` estimation window over a (T, M) yield panel.

    Each window runs the covariation fit, then the drift MLE warm-started
    from the previous window (its x_init taken from the previous filter
    output), then market-price extraction.  Per-window failures are
    recorded and the pipeline continues.
    """
    panel = np.atleast_2d(np.asarray(panel, dtype=float))
    taus = np.asarray(taus, dtype=int)
    if panel.shape[0] < window + 1:
        raise ValueError(f"panel needs at least {window + 1} rows, got {panel.shape[0]}")
    if panel.shape[1] != taus.size:
        raise ValueError("panel columns must match the tau grid")
    m = taus.size
    w = np.eye(m) if weights is None else as_matrix(weights, "weights")
    noise_cov = noise_scale * np.eye(m)

    results: list[EstimationResult] = []
    x_init = np.zeros(n)
    warm = {"rcov_x0": None, "b0": None, "a0": None, "alpha0": None}
    for t in range(window, panel.shape[0], stride):
        win = panel[t - window : t + 1]
        try:
            rcov = realized_cov_matrix(win)
            beta_diag, sigma_sqrt, rdiag = fit_beta_sigma_rcov(
                rcov, taus, w, n, n_starts=rcov_starts, seed=seed, x0=warm["rcov_x0"]
            )
            warm["rcov_x0"] = np.concatenate(
                [np.arctanh(np.clip(beta_diag, -0.999999, 0.999999)), _pack_sigma_sqrt(sigma_sqrt)]
            )
            mle = fit_drift_mle(
                win[1:],
                beta_diag,
                sigma_sqrt,
                taus,
                delta,
                noise_cov,
                x_init,
                b0=warm["b0"],
                a0=warm["a0"],
                alpha0=warm["alpha0"],
            )
            warm.update(b0=mle.b, a0=mle.a, alpha0=mle.alpha_diag)
            lam, big_lam = infer_market_price(
                mle.b, mle.a, beta_diag, mle.alpha_diag, sigma_sqrt
            )
            results.append(
                EstimationResult(
                    t=t,
                    b=mle.b,
                    beta_diag=beta_diag,
                    sigma_sqrt=sigma_sqrt,
                    a=mle.a,
                    alpha_diag=mle.alpha_diag,
                    lam=lam,
                    Lam=big_lam,
                    loglik=mle.loglik,
                    converged=rdiag.converged and mle.diagnostics.converged,
                )
            )
            # next window's initial factor from this window's filter output
            params = VasicekParams(mle.b, np.diag(beta_diag), sigma_sqrt, delta)
            spec = build_state_space(
                params, mle.a, np.diag(mle.alpha_diag), taus, noise_cov
            )
            path, _ = kalman_filter(spec, win[1:], x_init)
            x_init = path.x_filt[min(stride - 1, window - 1)]
        except Exception as exc:  # per-window failure: record and continue
            logger.warning("window ending at %d failed: %s", t, exc)
            results.append(EstimationResult(t=t, error=str(exc)))
    return results


def results_to_csv(results, path) -> None:
    """One row per window end, flattened parameter columns."""
    import csv

    results = list(results)
    ok = next((r for r in results if r.error is None), None)
    if ok is None:
        raise ValueError("no successful windows to serialize")
    n = ok.b.size
    header = ["t"]
    header += [f"b_{i + 1}" for i in range(n)]
    header += [f"beta_{i + 1}{i + 1}" for i in range(n)]
    header += [f"sigma_sqrt_{i + 1}{j + 1}" for i in range(n) for j in range(i + 1)]
    header += [f"a_{i + 1}" for i in range(n)]
    header += [f"alpha_{i + 1}{i + 1}" for i in range(n)]
    header += [f"lambda_{i + 1}" for i in range(n)]
    header += [f"Lambda_{i + 1}{j + 1}" for i in range(n) for j in range(n)]
    header += ["loglik", "converged", "error"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for r in results:
            if r.error is not None:
                writer.writerow([r.t] + [""] * (len(header) - 2) + [r.error])
                continue
            row = [r.t]
            row += [repr(float(v)) for v in r.b]
            row += [repr(float(v)) for v in r.beta_diag]
            row += [
                repr(float(r.sigma_sqrt[i, j])) for i in range(n) for j in range(i + 1)
            ]
            row += [repr(float(v)) for v in r.a]
            row += [repr(float(v)) for v in r.alpha_diag]
            row += [repr(float(v)) for v in r.lam]
            row += [repr(float(r.Lam[i, j])) for i in range(n) for j in range(n)]
            row += [repr(float(r.loglik)), str(r.converged), ""]
            writer.writerow(row)
