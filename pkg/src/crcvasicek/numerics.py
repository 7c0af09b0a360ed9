"""Shared numerical kernel.

Small dense matrix/vector helpers, a derivative-free simplex optimizer,
natural cubic splines and reproducible random-number streams.  Everything in
here is pure and value-semantic; parallel callers must hold distinct
:class:`RngStream` ids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.linalg import solve_triangular


class NonFiniteError(ValueError):
    """Input contains NaN or Inf entries."""


class NotPositiveDefiniteError(ValueError):
    """Cholesky factorization hit a non-positive pivot."""

    def __init__(self, pivot: int):
        self.pivot = pivot
        super().__init__(f"matrix is not positive definite (failing pivot {pivot})")


class ObjectiveNanError(ValueError):
    """Objective returned NaN during optimization."""

    def __init__(self, x: np.ndarray):
        self.x = np.asarray(x)
        super().__init__(f"objective returned NaN at {self.x}")


def as_vector(v, name: str = "vector") -> np.ndarray:
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if v.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise NonFiniteError(f"{name} contains non-finite entries")
    return v


def as_matrix(m, name: str = "matrix") -> np.ndarray:
    m = np.atleast_2d(np.asarray(m, dtype=float))
    if m.ndim != 2:
        raise ValueError(f"{name} must be two-dimensional, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NonFiniteError(f"{name} contains non-finite entries")
    return m


def as_square(m, name: str = "matrix") -> np.ndarray:
    m = as_matrix(m, name)
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be square, got shape {m.shape}")
    return m


def stationary_check(a) -> bool:
    """True iff every eigenvalue of the square matrix ``a`` has modulus < 1."""
    a = as_square(a, "mean-reversion matrix")
    d = np.diag(a)
    if np.count_nonzero(a - np.diag(d)) == 0:
        return bool(np.all(np.abs(d) < 1.0))
    return bool(np.max(np.abs(np.linalg.eigvals(a))) < 1.0)


def spd_sqrt(s, sym_tol: float = 1e-12) -> np.ndarray:
    """Lower-triangular Cholesky root L with L @ L.T == s.

    ``s`` must be symmetric to relative tolerance ``sym_tol`` and positive
    definite; a failed pivot is reported with its index.
    """
    s = as_square(s, "covariance matrix")
    scale = max(np.max(np.abs(s)), 1.0)
    if np.max(np.abs(s - s.T)) > sym_tol * scale:
        raise ValueError("matrix is not symmetric within tolerance")
    n = s.shape[0]
    low = np.zeros_like(s)
    for j in range(n):
        d = s[j, j] - low[j, :j] @ low[j, :j]
        if d <= 0.0:
            raise NotPositiveDefiniteError(j)
        low[j, j] = math.sqrt(d)
        for i in range(j + 1, n):
            low[i, j] = (s[i, j] - low[i, :j] @ low[j, :j]) / low[j, j]
    return low


def solve_lower_triangular(low, z) -> np.ndarray:
    """Forward substitution for L x = z; never forms the inverse."""
    low = as_matrix(low, "triangular matrix")
    z = np.asarray(z, dtype=float)
    if np.any(np.diag(low) == 0.0):
        raise ZeroDivisionError("triangular matrix has a zero diagonal entry")
    return solve_triangular(low, z, lower=True)


@dataclass
class NelderMeadResult:
    x: np.ndarray
    fun: float
    iterations: int
    converged: bool


def nelder_mead(
    objective,
    x0,
    tol_x: float = 1e-8,
    tol_f: float = 1e-10,
    max_iter: int = 20_000,
) -> NelderMeadResult:
    """Minimize ``objective`` by the Nelder--Mead simplex method.

    Standard reflection/expansion/contraction/shrink coefficients
    (1, 2, 0.5, 0.5).  Terminates when the simplex diameter drops below
    ``tol_x``, the value spread drops below ``tol_f`` or ``max_iter`` is
    reached (in which case ``converged`` is False and the best point is
    still returned).  Fully deterministic given ``x0`` and the options.
    """
    x0 = as_vector(np.asarray(x0, dtype=float), "x0")
    n = x0.size

    def f(x):
        v = float(objective(x))
        if math.isnan(v):
            raise ObjectiveNanError(x)
        return v

    simplex = [x0.copy()]
    for i in range(n):
        p = x0.copy()
        p[i] = p[i] * 1.05 if p[i] != 0.0 else 0.00025
        simplex.append(p)
    simplex = np.array(simplex)
    values = np.array([f(p) for p in simplex])

    iterations = 0
    converged = False
    while iterations < max_iter:
        order = np.argsort(values, kind="stable")
        simplex = simplex[order]
        values = values[order]

        diameter = np.max(np.abs(simplex[1:] - simplex[0]))
        spread = values[-1] - values[0]
        if diameter < tol_x or spread < tol_f:
            converged = True
            break

        iterations += 1
        centroid = simplex[:-1].mean(axis=0)
        xr = centroid + (centroid - simplex[-1])
        fr = f(xr)
        if fr < values[0]:
            xe = centroid + 2.0 * (centroid - simplex[-1])
            fe = f(xe)
            if fe < fr:
                simplex[-1], values[-1] = xe, fe
            else:
                simplex[-1], values[-1] = xr, fr
        elif fr < values[-2]:
            simplex[-1], values[-1] = xr, fr
        else:
            if fr < values[-1]:
                xc = centroid + 0.5 * (xr - centroid)
            else:
                xc = centroid + 0.5 * (simplex[-1] - centroid)
            fc = f(xc)
            if fc < min(fr, values[-1]):
                simplex[-1], values[-1] = xc, fc
            else:
                # shrink toward the best vertex
                simplex[1:] = simplex[0] + 0.5 * (simplex[1:] - simplex[0])
                values[1:] = [f(p) for p in simplex[1:]]

    best = int(np.argmin(values))
    return NelderMeadResult(simplex[best].copy(), float(values[best]), iterations, converged)


class NaturalCubicSpline:
    """C^2 interpolant through (knots, values) with zero second derivative at
    both ends.  Queries outside the knot range return the boundary value
    (flat extrapolation)."""

    def __init__(self, knots, values):
        knots = as_vector(knots, "knots")
        values = as_vector(values, "values")
        if knots.size < 2:
            raise ValueError("need at least 2 knots")
        if np.any(np.diff(knots) <= 0.0):
            raise ValueError("knots must be strictly increasing")
        if knots.size != values.size:
            raise ValueError("knots and values must have equal length")
        self.knots = knots
        self.values = values
        self._spline = CubicSpline(knots, values, bc_type="natural")

    def __call__(self, x):
        x = np.clip(np.asarray(x, dtype=float), self.knots[0], self.knots[-1])
        return self._spline(x)


def natural_cubic_spline(knots, values) -> NaturalCubicSpline:
    return NaturalCubicSpline(knots, values)


@dataclass
class RngStream:
    """Reproducible random stream keyed by (seed, stream id).

    The same pair reproduces bitwise-identical draws; distinct stream ids
    give independent streams by `SeedSequence` spawn-key construction.
    """

    seed: int
    stream: int = 0
    _gen: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        self._gen = np.random.default_rng(
            np.random.SeedSequence(self.seed, spawn_key=(self.stream,))
        )

    @property
    def generator(self) -> np.random.Generator:
        return self._gen

    def standard_normal(self, size=None) -> np.ndarray:
        return self._gen.standard_normal(size)
