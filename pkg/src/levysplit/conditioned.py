"""Exact samplers for correlated Brownian motion conditioned to a half-space.

The conditioned process is a fixed linear image of d independent standard
components, the first of which is a Bessel-3 process (a standard Brownian
motion conditioned to stay positive).  The linear map factors as M R where
M is a Cholesky square root of the covariance and R is orthogonal, chosen
so that the projection onto the conditioning direction reads off the first
component: R^T M^T eta = sqrt(eta^T Sigma eta) e1.

The Bessel-3 path is sampled as the norm of a 3-dimensional Brownian grid,
which is exact in law at the grid points and has no drift singularity at 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .core import GridPath, as_direction, symmetrize

CHOL_PIVOT_ZERO = 1e-12
CHOL_PIVOT_NEG = 1e-10
UNIT_TOL = 1e-10
REFLECTOR_TOL = 1e-12


def cholesky(sigma) -> np.ndarray:
    """Lower-triangular L with L L^T = sigma, tolerating rank deficiency.

    Pivots below 1e-12 are zeroed (the corresponding column is skipped);
    a pivot below -1e-10 raises.
    """
    a = symmetrize(sigma)
    n = a.shape[0]
    low = np.zeros_like(a)
    for j in range(n):
        pivot = a[j, j] - low[j, :j] @ low[j, :j]
        if pivot < -CHOL_PIVOT_NEG:
            raise ValueError(f"matrix is not positive semidefinite (pivot {pivot:.3e})")
        if pivot <= CHOL_PIVOT_ZERO:
            continue
        low[j, j] = math.sqrt(pivot)
        for i in range(j + 1, n):
            low[i, j] = (a[i, j] - low[i, :j] @ low[j, :j]) / low[j, j]
    return low


def rotation_to_e1(u) -> np.ndarray:
    """Householder reflector H (orthogonal, symmetric) with H u = e1.

    ``u`` must be a unit vector; the identity is returned when u is already
    within 1e-12 of e1.
    """
    u = np.asarray(u, dtype=np.float64)
    if abs(np.linalg.norm(u) - 1.0) > UNIT_TOL:
        raise ValueError("input must be a unit vector")
    w = u.copy()
    w[0] -= 1.0
    wn2 = w @ w
    if math.sqrt(wn2) < REFLECTOR_TOL:
        return np.eye(u.shape[0])
    return np.eye(u.shape[0]) - 2.0 * np.outer(w, w) / wn2


@dataclass(frozen=True)
class ConditioningTransform:
    """The factorization (M, R, scale) attached to a covariance and direction.

    M M^T = sigma, R R^T = I, R^T M^T eta = scale * e1 with
    scale = sqrt(eta^T sigma eta).  ``mr`` is the product M R actually
    applied to the independent components.
    """

    m: np.ndarray
    r: np.ndarray
    scale: float

    @property
    def mr(self) -> np.ndarray:
        return self.m @ self.r

    @property
    def d(self) -> int:
        return self.m.shape[0]


def conditioning_transform(sigma, eta) -> ConditioningTransform:
    """Build the (M, R, scale) triple for a covariance and direction.

    R is the reflector through (u - e1) for u = M^T eta / |M^T eta|, with
    the second basis column negated so that R is a proper rotation and, in
    dimension 2, M R agrees entrywise with the closed-form conditioning
    matrix of the correlated case (and varies continuously into R = I as
    u -> e1).
    """
    eta = as_direction(eta)
    sigma = symmetrize(sigma)
    m = cholesky(sigma)
    v = m.T @ eta.eta
    scale2 = float(v @ v)
    if scale2 <= CHOL_PIVOT_ZERO:
        raise ValueError("direction carries no Brownian variance (eta^T sigma eta ~ 0)")
    scale = math.sqrt(scale2)
    u = v / scale
    h = rotation_to_e1(u)
    r = h.T.copy()
    if eta.d >= 2 and not np.array_equal(h, np.eye(eta.d)):
        r[:, 1] = -r[:, 1]
    return ConditioningTransform(m=m, r=r, scale=scale)


def example_conditioning_matrix(a, b, sigma1, sigma2, rho) -> np.ndarray:
    """Closed-form M R for d = 2, direction (a, b), standard deviations
    sigma1, sigma2 and correlation rho (used as an oracle and by the CLI)."""
    s = math.sqrt(a * a * sigma1**2 + 2 * a * b * sigma1 * sigma2 * rho + b * b * sigma2**2)
    root = math.sqrt(1.0 - rho * rho)
    return (
        np.array(
            [
                [a * sigma1**2 + b * sigma1 * sigma2 * rho, -b * sigma1 * sigma2 * root],
                [a * sigma1 * sigma2 * rho + b * sigma2**2, a * sigma1 * sigma2 * root],
            ]
        )
        / s
    )


def bessel3_path(x0: float, n_steps: int, step: float, rng) -> np.ndarray:
    """Bessel-3 path from x0 >= 0 on a grid, exact in law at grid points.

    Sampled as the norm of (x0, 0, 0) + W for a 3-dimensional standard
    Brownian grid W.
    """
    from .sim import as_generator  # local import to avoid a module cycle

    if x0 < 0:
        raise ValueError("x0 must be nonnegative")
    gen = as_generator(rng)
    w = math.sqrt(step) * gen.standard_normal((n_steps, 3))
    np.cumsum(w, axis=0, out=w)
    w[:, 0] += x0
    out = np.empty(n_steps + 1)
    out[0] = x0
    out[1:] = np.linalg.norm(w, axis=1)
    return out


def _conditioned_components(transform, n_steps, step, gen, x0_first=0.0):
    """Stack the Bessel-3 first component and d-1 standard Brownian grids."""
    d = transform.d
    comps = np.empty((n_steps + 1, d))
    comps[:, 0] = bessel3_path(x0_first, n_steps, step, gen)
    if d > 1:
        b = math.sqrt(step) * gen.standard_normal((n_steps, d - 1))
        comps[0, 1:] = 0.0
        np.cumsum(b, axis=0, out=comps[1:, 1:])
    return comps


def conditioned_bm_path(sigma, eta, horizon: float, step: float, rng) -> GridPath:
    """Sample the covariance-sigma Brownian motion conditioned to stay in
    the half-space of eta, started at the boundary point 0."""
    from .sim import as_generator

    if not step > 0:
        raise ValueError("step must be positive")
    if horizon < step:
        raise ValueError("horizon must be at least one step")
    tr = conditioning_transform(sigma, eta)
    gen = as_generator(rng)
    n = math.ceil(horizon / step)
    comps = _conditioned_components(tr, n, step, gen)
    return GridPath(step=step, values=comps @ tr.mr.T)


def conditioned_bm_from_x(sigma, eta, x, horizon: float, step: float, rng) -> GridPath:
    """Conditioned Brownian motion started from x with <x, eta> >= 0.

    The projected component starts the Bessel-3 path at <x, eta>/scale; at
    <x, eta> = 0 this is exactly x + the boundary-started process.
    """
    from .sim import as_generator

    eta = as_direction(eta)
    x = np.asarray(x, dtype=np.float64)
    z0 = float(x @ eta.eta)
    if z0 < 0:
        raise ValueError("start point must satisfy <x, eta> >= 0")
    if not step > 0:
        raise ValueError("step must be positive")
    if horizon < step:
        raise ValueError("horizon must be at least one step")
    tr = conditioning_transform(sigma, eta)
    gen = as_generator(rng)
    n = math.ceil(horizon / step)
    comps = _conditioned_components(tr, n, step, gen, x0_first=z0 / tr.scale)
    comps[:, 0] -= z0 / tr.scale
    return GridPath(step=step, values=x + comps @ tr.mr.T)


def _phi(x, t):
    return np.exp(-(x * x) / (2.0 * t)) / math.sqrt(2.0 * math.pi * t)


def bessel3_transition_density(x: float, y, t: float):
    """Transition density q_t(x, y) of the Bessel-3 process.

    q_t(x, y) = (y/x) (phi_t(y - x) - phi_t(y + x)) for x > 0 and the x -> 0
    limit sqrt(2/pi) y^2 t^{-3/2} exp(-y^2 / 2t) at the boundary.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    if x < 0:
        raise ValueError("x must be nonnegative")
    y = np.asarray(y, dtype=np.float64)
    if x == 0.0:
        out = math.sqrt(2.0 / math.pi) * y * y * t**-1.5 * np.exp(-(y * y) / (2.0 * t))
    else:
        out = (y / x) * (_phi(y - x, t) - _phi(y + x, t))
    return out if out.ndim else float(out)


def bessel3_transition_cdf(x: float, y, t: float):
    """Integral of the transition density over (0, y]."""
    if t <= 0:
        raise ValueError("t must be positive")
    if x < 0:
        raise ValueError("x must be nonnegative")
    y = np.asarray(y, dtype=np.float64)
    rt = math.sqrt(t)
    if x == 0.0:
        z = y / rt
        out = 2.0 * ndtr(z) - 1.0 - math.sqrt(2.0 / math.pi) * z * np.exp(-z * z / 2.0)
    else:
        out = ndtr((y - x) / rt) + ndtr((y + x) / rt) - 1.0 + (t / x) * (_phi(y + x, t) - _phi(y - x, t))
    return out if out.ndim else float(out)
