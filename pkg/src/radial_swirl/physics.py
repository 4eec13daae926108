"""Pointwise constitutive laws and discrete radial differential operators.

Fields live on cell centers. Derivatives use centered differences padded with
one ghost cell on each side: across r = 0 the density is even and both velocity
components are odd; at r = R the velocity ghost is the quadratic extrapolation
through the homogeneous Dirichlet value.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .grid import FluidParams, RadialGrid, mean_disk


@dataclass(frozen=True)
class FlowState:
    t: float
    rho: np.ndarray
    u_r: np.ndarray
    u_theta: np.ndarray

    def __post_init__(self):
        for name in ("rho", "u_r", "u_theta"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        n = self.rho.shape
        if self.u_r.shape != n or self.u_theta.shape != n or len(n) != 1:
            raise ValueError("rho, u_r, u_theta must be 1-D arrays of equal length")

    def with_time(self, t: float) -> "FlowState":
        return replace(self, t=float(t))

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.rho)) and np.all(np.isfinite(self.u_r))
                    and np.all(np.isfinite(self.u_theta)) and np.isfinite(self.t))


@dataclass(frozen=True)
class DerivedFields:
    P: np.ndarray
    lam: np.ndarray
    divu: np.ndarray
    w: np.ndarray
    gradu_sq: np.ndarray
    G: np.ndarray
    Pbar: float
    Gboundary: float


def _check_state(grid: RadialGrid, state: FlowState):
    if state.rho.shape != (grid.N,):
        raise ValueError(f"state has {state.rho.shape[0]} cells, grid has {grid.N}")


def pressure(params: FluidParams, rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0):
        raise ValueError("negative density")
    return rho ** params.gamma


def bulk_viscosity(params: FluidParams, rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0):
        raise ValueError("negative density")
    return rho ** params.beta


def dirichlet_ghost(u: np.ndarray) -> float:
    """Value at R + h/2 of the quadratic through u(R) = 0 and the last two cells."""
    return -2.0 * u[-1] + u[-2] / 3.0


def pad_velocity(u: np.ndarray) -> np.ndarray:
    return np.concatenate(([-u[0]], u, [dirichlet_ghost(u)]))


def radial_derivative(grid: RadialGrid, u: np.ndarray) -> np.ndarray:
    """Centered d/dr of a velocity component (odd at 0, zero at R)."""
    up = pad_velocity(u)
    return (up[2:] - up[:-2]) / (2.0 * grid.h)


def _curl_like(grid: RadialGrid, u: np.ndarray) -> np.ndarray:
    # d_r u + u / r, the 2-D divergence of u e_r (or curl of u e_theta)
    return radial_derivative(grid, u) + u / grid.centers


def divergence(grid: RadialGrid, state: FlowState) -> np.ndarray:
    _check_state(grid, state)
    return _curl_like(grid, state.u_r)


def vorticity(grid: RadialGrid, state: FlowState) -> np.ndarray:
    """Scalar vorticity d_2 u_1 - d_1 u_2 of the swirl field, d_r u_theta + u_theta / r."""
    _check_state(grid, state)
    return _curl_like(grid, state.u_theta)


def grad_u_squared(grid: RadialGrid, state: FlowState) -> np.ndarray:
    _check_state(grid, state)
    r = grid.centers
    dur = radial_derivative(grid, state.u_r)
    dut = radial_derivative(grid, state.u_theta)
    return dur ** 2 + dut ** 2 + (state.u_r / r) ** 2 + (state.u_theta / r) ** 2


def extrapolate_to_wall(f: np.ndarray) -> float:
    """Linear extrapolation from the two outermost centers to r = R."""
    return 1.5 * f[-1] - 0.5 * f[-2]


def effective_viscous_flux(params: FluidParams, grid: RadialGrid, state: FlowState):
    """Return ``(G, Pbar, G_at_R)`` with G = (2 mu + lambda) div u - (P - Pbar)."""
    _check_state(grid, state)
    P = pressure(params, state.rho)
    Pbar = mean_disk(grid, P)
    G = (2.0 * params.mu + bulk_viscosity(params, state.rho)) * divergence(grid, state) - (P - Pbar)
    return G, Pbar, extrapolate_to_wall(G)


def derived_fields(params: FluidParams, grid: RadialGrid, state: FlowState) -> DerivedFields:
    G, Pbar, GR = effective_viscous_flux(params, grid, state)
    return DerivedFields(
        P=pressure(params, state.rho),
        lam=bulk_viscosity(params, state.rho),
        divu=divergence(grid, state),
        w=vorticity(grid, state),
        gradu_sq=grad_u_squared(grid, state),
        G=G,
        Pbar=Pbar,
        Gboundary=GR,
    )


def theta_of_rho(params: FluidParams, rho, floor: float = 1e-12) -> np.ndarray:
    """2 mu log(rho) + rho^beta / beta, with rho clamped below at ``floor``."""
    if not floor > 0:
        raise ValueError(f"floor must be positive, got {floor!r}")
    rho = np.maximum(np.asarray(rho, dtype=float), floor)
    return 2.0 * params.mu * np.log(rho) + rho ** params.beta / params.beta


def inward_integral(grid: RadialGrid, f: np.ndarray, f_wall: float = 0.0):
    """Trapezoid integral of f from R down to each center.

    Returns ``(at_centers, at_origin)`` for the signed integral from R to r,
    so both are zero when f vanishes and the value at R is exactly 0.
    """
    f = np.asarray(f, dtype=float)
    h = grid.h
    seg = np.empty(grid.N)
    seg[-1] = 0.25 * h * (f[-1] + f_wall)
    seg[:-1] = 0.5 * h * (f[:-1] + f[1:])
    # integral from r_i to R, accumulated from the wall
    outward = np.cumsum(seg[::-1])[::-1]
    origin = outward[0] + 0.25 * h * f[0]
    return -outward, -origin


def xi_field(grid: RadialGrid, state: FlowState) -> np.ndarray:
    """xi(r) = integral from R to r of rho u_r, at centers."""
    _check_state(grid, state)
    return inward_integral(grid, state.rho * state.u_r)[0]
