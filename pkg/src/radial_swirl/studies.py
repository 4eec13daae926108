"""Convergence drivers shared by the command line, the scripts and the tests."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, List, Optional, Sequence

import numpy as np

from .diagnostics import DiagRecord, ledger_column
from .grid import FluidParams, RadialGrid, build_grid
from .mms import Manufactured, default_manufactured, l2_errors, mms_sources
from .physics import FlowState
from .solver import SolverConfig, run

SATURATION = 1e-12


def observed_orders(values: Sequence[float]) -> List[float]:
    """log2 of successive ratios; NaN where either value is at round-off."""
    out = []
    for a, b in zip(values, values[1:]):
        if a <= SATURATION or b <= SATURATION:
            out.append(float("nan"))
        else:
            out.append(float(np.log2(a / b)))
    return out


@dataclass(frozen=True)
class LevelResult:
    N: int
    dt_max: float
    energy_residual: float
    boundary_discrepancy: float
    transport_residual: float
    mass_drift: float
    steps: int


def identity_residuals(ledger: Sequence[DiagRecord]):
    """(max relative energy residual, max boundary discrepancy, max transport residual)."""
    E0 = ledger[0].energy
    er = ledger_column(ledger, "energy_residual")
    scale = abs(E0) if E0 != 0 else 1.0
    bd = ledger_column(ledger, "G_boundary_formula") - ledger_column(ledger, "G_boundary_direct")
    tr = ledger_column(ledger, "transport_residual_norm")
    nanmax = lambda a: float(np.nanmax(np.abs(a))) if np.any(np.isfinite(a)) else float("nan")
    return float(np.max(np.abs(er))) / scale, nanmax(bd), nanmax(tr)


def refinement_ladder(params: FluidParams, initial: Callable[[FluidParams, RadialGrid], FlowState],
                      solver: SolverConfig, N0: int, levels: int,
                      floor_factor: Optional[float] = None) -> List[LevelResult]:
    """Repeat a run at (N0 2^j, dt_max 2^-j) and collect the identity residuals.

    ``solver.dt_max`` should be small enough to bind at every level so the
    time step halves together with the mesh width.
    """
    results = []
    for j in range(levels):
        N = N0 * 2 ** j
        grid = build_grid(N, params.R)
        s0 = initial(params, grid)
        cfg = replace(solver, dt_max=solver.dt_max / 2 ** j, snapshot_every=1)
        if floor_factor is not None:
            cfg = replace(cfg, rho_floor=floor_factor * float(np.mean(s0.rho)))
        _, ledger = run(params, grid, s0, cfg)
        er, bd, tr = identity_residuals(ledger)
        M = ledger_column(ledger, "mass")
        drift = float(np.max(np.abs(M - M[0])) / M[0]) if M[0] != 0 else 0.0
        results.append(LevelResult(N, cfg.dt_max, er, bd, tr, drift, len(ledger) - 1))
    return results


@dataclass(frozen=True)
class MmsLevel:
    N: int
    dt_max: float
    err_rho: float
    err_ur: float
    err_utheta: float


def mms_ladder(params: FluidParams, N0: int = 64, levels: int = 3, t_end: float = 1.0,
               dt_factor: float = 0.25, manufactured: Optional[Manufactured] = None,
               viscous_scheme: str = "crank_nicolson", advect_scheme: str = "muscl2") -> List[MmsLevel]:
    """Forced runs against a manufactured solution with dt_max = dt_factor * h / R."""
    m = manufactured or default_manufactured(params.R)
    src = mms_sources(params, m)
    out = []
    for j in range(levels):
        N = N0 * 2 ** j
        grid = build_grid(N, params.R)
        cfg = SolverConfig(t_end=t_end, dt_max=dt_factor / N, viscous_scheme=viscous_scheme,
                           advect_scheme=advect_scheme)
        state, _ = run(params, grid, m.state(grid, 0.0), cfg, mms=src, diagnostics=False)
        e = l2_errors(grid, state, m.state(grid, t_end))
        out.append(MmsLevel(N, cfg.dt_max, *e))
    return out
