"""Named initial-data presets, one per parameter regime of interest.

Each preset builds an initial state from (params, grid) and carries the
parameters and solver settings it was designed and tested with.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict

import numpy as np

from .grid import FluidParams, RadialGrid
from .initial_data import grad_u0_norm
from .physics import FlowState
from .threshold import ThresholdInputs, solve_a0


def swirl_shape(grid: RadialGrid) -> np.ndarray:
    """x (1 - x^2)^3 with x = r / R: vanishes at both ends with zero wall curvature."""
    x = grid.centers / grid.R
    return x * (1.0 - x * x) ** 3


@dataclass(frozen=True)
class Preset:
    name: str
    build: Callable[[FluidParams, RadialGrid], FlowState]
    params: FluidParams
    solver: Dict[str, object] = field(default_factory=dict)
    description: str = ""

    def initial_state(self, params: FluidParams, grid: RadialGrid) -> FlowState:
        if abs(params.R - grid.R) > 1e-14 * params.R:
            raise ValueError("grid radius differs from params.R")
        return self.build(params, grid)


def _equilibrium(params, grid):
    n = grid.N
    return FlowState(0.0, np.ones(n), np.zeros(n), np.zeros(n))


def _decaying_swirl(params, grid):
    n = grid.N
    return FlowState(0.0, np.ones(n), np.zeros(n), 2.0 * swirl_shape(grid))


def _large(params, grid):
    x = grid.centers / grid.R
    rho = 1.0 + 0.8 * np.cos(np.pi * x)
    return FlowState(0.0, rho, 0.5 * swirl_shape(grid), 2.0 * swirl_shape(grid))


SMALL_VELOCITY = 0.2
SMALL_FRACTION = 0.9
REJECTED_FRACTION = 2.0


def small_density_state(params: FluidParams, grid: RadialGrid, fraction: float) -> FlowState:
    """Density with sup = fraction * a0, a0 solved with the discrete ||grad u0||."""
    ut = SMALL_VELOCITY * swirl_shape(grid)
    ur = np.zeros(grid.N)
    du = grad_u0_norm(grid, ur, ut)
    a0 = solve_a0(ThresholdInputs(params.mu, params.beta, params.gamma, params.R, du)).a0
    x = grid.centers / grid.R
    shape = 0.75 + 0.25 * np.cos(np.pi * x)
    rho = fraction * a0 * shape / shape.max()
    return FlowState(0.0, rho, ur, ut)


_IE = {"viscous_scheme": "implicit_euler", "advect_scheme": "muscl2"}
_CN = {"viscous_scheme": "crank_nicolson", "advect_scheme": "muscl2"}

PRESETS: Dict[str, Preset] = {
    p.name: p for p in (
        Preset("equilibrium", _equilibrium, FluidParams(1.0, 1.0, 2.0, 1.0), dict(_CN),
               "uniform density at rest"),
        Preset("decaying_swirl", _decaying_swirl, FluidParams(0.5, 1.0, 2.0, 1.0), dict(_CN),
               "uniform density with a smooth swirl that spins down"),
        Preset("beta_ge_1_large", _large, FluidParams(0.03, 2.0, 1.4, 2.0), dict(_IE),
               "9:1 density contrast with radial flow and swirl, beta = 2"),
        Preset("beta_between", _large, FluidParams(0.5, 1.5, 2.0, 1.0), dict(_IE),
               "large data with 1 < beta <= gamma"),
        Preset("beta_eq_1", _large, FluidParams(0.5, 1.0, 1.4, 1.0), dict(_IE),
               "large data at beta = 1"),
        Preset("beta_lt_1_small", lambda p, g: small_density_state(p, g, SMALL_FRACTION),
               FluidParams(1.0, 0.5, 2.0, 1.0), dict(_IE),
               "beta = 1/2, sup rho0 = 0.9 a0 (admitted)"),
        Preset("beta_lt_1_rejected", lambda p, g: small_density_state(p, g, REJECTED_FRACTION),
               FluidParams(1.0, 0.5, 2.0, 1.0), dict(_IE),
               "beta = 1/2, sup rho0 = 2 a0 (not admitted)"),
    )
}


def get_preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
