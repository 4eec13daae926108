"""Regularized initial data: mollified density and compatible initial velocity."""

from __future__ import annotations

import numpy as np
from scipy.linalg import solve_banded

from .grid import FluidParams, RadialGrid
from .physics import FlowState, grad_u_squared, pressure
from .solver import BANDS, apply_banded, face_coefficients, viscous_matrix


def bump(s: np.ndarray) -> np.ndarray:
    """Unnormalized smooth bump exp(-1 / (1 - s^2)) on |s| < 1, zero outside."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - s[inside] ** 2))
    return out


_BUMP_MASS = None


def _bump_mass() -> float:
    """Integral of bump(|x|) over the unit disk."""
    global _BUMP_MASS
    if _BUMP_MASS is None:
        x, w = np.polynomial.legendre.leggauss(200)
        s = 0.5 * (x + 1.0)
        _BUMP_MASS = float(2.0 * np.pi * np.sum(0.5 * w * bump(s) * s))
    return _BUMP_MASS


def _ring_kernel(r, s, delta: float, n_angle: int) -> np.ndarray:
    """Circle average K(r, s) = int_0^{2 pi} eta_delta(|x - y|) dphi with |x| = r, |y| = s.

    Only the arc where the kernel is supported is integrated, so the
    Gauss rule sees a smooth integrand that vanishes at the arc ends.
    """
    r, s = np.broadcast_arrays(np.asarray(r, float), np.asarray(s, float))
    c = (r * r + s * s - delta * delta) / np.maximum(2.0 * r * s, 1e-300)
    phi_max = np.arccos(np.clip(c, -1.0, 1.0))
    x, w = np.polynomial.legendre.leggauss(n_angle)
    phi = 0.5 * phi_max[..., None] * (x + 1.0)
    d2 = r[..., None] ** 2 + s[..., None] ** 2 - 2.0 * (r * s)[..., None] * np.cos(phi)
    vals = bump(np.sqrt(np.maximum(d2, 0.0)) / delta)
    return phi_max * np.sum(w * vals, axis=-1) / (_bump_mass() * delta * delta)


def mollify_density(grid: RadialGrid, rho0, delta: float, n_angle: int = 24,
                    panel_nodes: int = 4) -> np.ndarray:
    """Convolve the radial profile with a smooth compact kernel of width ``delta``, then add ``delta``.

    The profile is read as the piecewise-linear interpolant of the cell
    values, continued by its last value beyond the outermost center (and
    so beyond R). The planar convolution of a radial function reduces to
    rho^delta(r) = int K(r, s) rho0(s) s ds with the circle average K of the
    kernel; the s-integral runs over panels between interpolation
    breakpoints, each no wider than delta / 8, with a Gauss rule.
    """
    if not delta > 0:
        raise ValueError(f"delta must be > 0, got {delta!r}")
    rho0 = np.asarray(rho0, dtype=float)
    if rho0.shape != (grid.N,):
        raise ValueError("rho0 must live on the grid centers")
    if np.any(rho0 < 0):
        raise ValueError("rho0 must be non-negative")
    r = grid.centers
    edges = np.concatenate(([0.0], r, [r[-1] + delta + grid.h]))
    m = np.maximum(1, np.ceil(8.0 * np.diff(edges) / delta).astype(int))
    width = np.repeat(np.diff(edges) / m, m)
    starts = np.concatenate(([0.0], np.cumsum(width)[:-1]))
    x, w = np.polynomial.legendre.leggauss(panel_nodes)
    s_nodes = (starts[:, None] + 0.5 * width[:, None] * (x + 1.0)).ravel()
    s_weights = (0.5 * width[:, None] * w).ravel()
    vals = np.interp(s_nodes, r, rho0)
    rows, cols = np.nonzero(np.abs(s_nodes[None, :] - r[:, None]) < delta)
    k = _ring_kernel(r[rows], s_nodes[cols], delta, n_angle) * s_nodes[cols] * s_weights[cols]
    num = np.bincount(rows, weights=k * vals[cols], minlength=grid.N)
    den = np.bincount(rows, weights=k, minlength=grid.N)
    return num / den + delta


def _pressure_gradient(grid: RadialGrid, P: np.ndarray) -> np.ndarray:
    # even across r = 0, one-sided second order at the last cell
    Pp = np.concatenate(([P[0]], P, [3.0 * P[-1] - 3.0 * P[-2] + P[-3]]))
    return (Pp[2:] - Pp[:-2]) / (2.0 * grid.h)


def compatibility_operator(params: FluidParams, grid: RadialGrid, rho0, u_r, u_theta):
    """Forward map u -> (rho0^{-1/2} times the left-hand side) of the compatibility system.

    Returns (g_r, g_theta) such that the discrete system solved by
    :func:`solve_compatibility_velocity` reproduces (u_r, u_theta).
    """
    rho0 = _positive(rho0, grid)
    c_r, c_t = face_coefficients(params, rho0)
    lhs_r = -apply_banded(viscous_matrix(grid, c_r), np.asarray(u_r, float)) \
        + _pressure_gradient(grid, pressure(params, rho0))
    lhs_t = -apply_banded(viscous_matrix(grid, c_t), np.asarray(u_theta, float))
    sq = np.sqrt(rho0)
    return lhs_r / sq, lhs_t / sq


def _positive(rho0, grid):
    rho0 = np.asarray(rho0, dtype=float)
    if rho0.shape != (grid.N,):
        raise ValueError("rho0 must live on the grid centers")
    if not np.all(np.isfinite(rho0)) or np.any(rho0 <= 0):
        raise ValueError("rho0 must be strictly positive (mollify it first)")
    return rho0


def solve_compatibility_velocity(params: FluidParams, grid: RadialGrid, rho0, g):
    """Solve the two decoupled Dirichlet problems for the compatible initial velocity.

    ``g`` is the pair (g_r, g_theta) on the grid centers.
    """
    rho0 = _positive(rho0, grid)
    g_r, g_t = (np.asarray(x, dtype=float) for x in g)
    if g_r.shape != (grid.N,) or g_t.shape != (grid.N,):
        raise ValueError("g components must live on the grid centers")
    sq = np.sqrt(rho0)
    c_r, c_t = face_coefficients(params, rho0)
    rhs_r = sq * g_r - _pressure_gradient(grid, pressure(params, rho0))
    rhs_t = sq * g_t
    out = []
    for coef, rhs in ((c_r, rhs_r), (c_t, rhs_t)):
        A = -viscous_matrix(grid, coef)
        try:
            u = solve_banded(BANDS, A, rhs)
        except np.linalg.LinAlgError as exc:
            raise ValueError(f"compatibility system is singular: {exc}") from exc
        if not np.all(np.isfinite(u)):
            raise ValueError("compatibility solve returned non-finite values")
        out.append(u)
    return out[0], out[1]


def grad_u0_norm(grid: RadialGrid, u_r, u_theta) -> float:
    """Discrete ||grad u||_{L^2} of a velocity pair (density is irrelevant)."""
    n = grid.N
    s = FlowState(0.0, np.ones(n), u_r, u_theta)
    return float(np.sqrt(np.dot(grad_u_squared(grid, s), grid.weights)))
