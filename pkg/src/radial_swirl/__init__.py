"""Radially symmetric compressible Navier-Stokes with swirl and bulk viscosity rho^beta.

Finite-volume solver on a disk, reduced to one radial coordinate, together with
a diagnostics ledger that tracks the exact identities and explicit bounds of
the analysis (energy equality, effective viscous flux, density cap).
"""

from .grid import FluidParams, RadialGrid, build_grid, integrate_disk, lp_norm, mean_disk
from .physics import FlowState, effective_viscous_flux
from .solver import MmsSource, SolverConfig, SolverError, run, stable_dt, step
from .diagnostics import DiagRecord, LEDGER_COLUMNS
from .threshold import ThresholdInputs, ThresholdReport, K_of_a, solve_a0, admissibility_verdict

__all__ = [
    "FluidParams", "RadialGrid", "build_grid", "integrate_disk", "lp_norm", "mean_disk",
    "FlowState", "effective_viscous_flux",
    "MmsSource", "SolverConfig", "SolverError", "run", "stable_dt", "step",
    "DiagRecord", "LEDGER_COLUMNS",
    "ThresholdInputs", "ThresholdReport", "K_of_a", "solve_a0", "admissibility_verdict",
]

__version__ = "0.1.0"
