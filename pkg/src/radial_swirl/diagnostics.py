"""Verification ledger: identities and bounded functionals evaluated on snapshots.

Time derivatives inside identities are taken from the quadratic interpolant
through three consecutive states (centered in the interior, one-sided at the
ends of a run), never from scheme-internal tendencies.
"""

from __future__ import annotations

from collections import deque
from dataclasses import asdict, dataclass, fields
from typing import Optional, Sequence

import numpy as np

from .grid import FluidParams, RadialGrid, integrate_disk, lp_norm, mean_disk
from .physics import (
    FlowState,
    bulk_viscosity,
    divergence,
    effective_viscous_flux,
    grad_u_squared,
    inward_integral,
    pressure,
    theta_of_rho,
    vorticity,
    xi_field,
)


@dataclass(frozen=True)
class DiagRecord:
    t: float
    mass: float
    energy: float
    dissipation_cum: float
    energy_residual: float
    sup_rho: float
    G_boundary_direct: float
    G_boundary_formula: float
    transport_residual_norm: float
    supnorm_ineq_slack: float
    rho_u3: float
    rho_u_2pd: float
    dist_rho_L2: float
    dist_gradu_L2: float
    A1sq: float
    A2sq: float
    A3sq: float
    cap_ok: bool


LEDGER_COLUMNS = tuple(f.name for f in fields(DiagRecord))


def ledger_column(ledger: Sequence[DiagRecord], name: str) -> np.ndarray:
    return np.array([getattr(rec, name) for rec in ledger], dtype=float)


# --------------------------------------------------------------------------
# single-state functionals


def energy(params: FluidParams, grid: RadialGrid, state: FlowState) -> float:
    """Kinetic plus internal energy, 1/2 rho |u|^2 + rho^gamma / (gamma - 1)."""
    u2 = state.u_r ** 2 + state.u_theta ** 2
    dens = 0.5 * state.rho * u2 + pressure(params, state.rho) / (params.gamma - 1.0)
    return integrate_disk(grid, dens)


def dissipation_rate(params: FluidParams, grid: RadialGrid, state: FlowState) -> float:
    """mu ||grad u||^2 + ||sqrt(mu + lambda) div u||^2."""
    divu = divergence(grid, state)
    lam = bulk_viscosity(params, state.rho)
    return integrate_disk(grid, params.mu * grad_u_squared(grid, state)
                          + (params.mu + lam) * divu ** 2)


def weighted_moment(grid: RadialGrid, state: FlowState, exponent: float) -> float:
    """Integral of rho |u|^exponent over the disk."""
    if not exponent >= 2:
        raise ValueError(f"exponent must be >= 2, got {exponent!r}")
    speed = np.hypot(state.u_r, state.u_theta)
    return integrate_disk(grid, state.rho * speed ** exponent)


def default_moment_delta(params: FluidParams, sup_rho: float) -> float:
    return min(0.5, (params.gamma - 1.0) / (2.0 * (params.gamma + 1.0))) / np.sqrt(sup_rho + 1.0)


def asymptotic_metrics(params: FluidParams, grid: RadialGrid, state: FlowState, p: float,
                       rho_s: float):
    """(||rho - rho_s||_{L^p}, ||grad u||_{L^p})."""
    if not p >= 1:
        raise ValueError(f"p must be >= 1, got {p!r}")
    return (lp_norm(grid, state.rho - rho_s, p),
            lp_norm(grid, np.sqrt(grad_u_squared(grid, state)), p))


def supnorm_slack(grid: RadialGrid, state: FlowState) -> tuple:
    """Return (slack, ||grad u||_{L^2}) for ||u||_inf <= ||grad u||_{L^2} / sqrt(2 pi)."""
    g = lp_norm(grid, np.sqrt(grad_u_squared(grid, state)), 2)
    usup = float(np.max(np.hypot(state.u_r, state.u_theta)))
    return g / np.sqrt(2.0 * np.pi) - usup, g


def cubic_moment_bound(params: FluidParams, grid: RadialGrid, state0: FlowState) -> float:
    """Right-hand side of the rho |u|^3 bound in the small-density regime."""
    mu, b, g = params.mu, params.beta, params.gamma
    return (weighted_moment(grid, state0, 3.0)
            + 3.0 * np.sqrt(2.0) * 7.0 ** (g / b) * mu ** (g / b - 1.0) * params.R
            * energy(params, grid, state0))


# --------------------------------------------------------------------------
# three-point time derivatives


def _derivative_weights(ts: Sequence[float], x: float) -> np.ndarray:
    """Weights w_j with f'(x) ~ sum_j w_j f(t_j) for the interpolant through ts."""
    ts = np.asarray(ts, dtype=float)
    n = ts.size
    w = np.zeros(n)
    for j in range(n):
        denom = np.prod([ts[j] - ts[m] for m in range(n) if m != j])
        num = 0.0
        for m in range(n):
            if m == j:
                continue
            num += np.prod([x - ts[k] for k in range(n) if k not in (j, m)])
        w[j] = num / denom
    return w


def _pad_even_extrap(f: np.ndarray) -> np.ndarray:
    # even across r = 0, quadratic extrapolation beyond r = R
    g1 = 3.0 * f[-1] - 3.0 * f[-2] + f[-3]
    g2 = 3.0 * g1 - 3.0 * f[-1] + f[-2]
    return np.concatenate(([f[1], f[0]], f, [g1, g2]))


def upwind_gradient(grid: RadialGrid, f: np.ndarray, velocity: np.ndarray) -> np.ndarray:
    """Second-order one-sided derivative of f taken from the upwind side."""
    fp = _pad_even_extrap(np.asarray(f, dtype=float))
    c = fp[2:-2]
    back = (3.0 * c - 4.0 * fp[1:-3] + fp[:-4]) / (2.0 * grid.h)
    fwd = (-3.0 * c + 4.0 * fp[3:-1] - fp[4:]) / (2.0 * grid.h)
    return np.where(velocity >= 0, back, fwd)


def _radial_first_moment(grid: RadialGrid, state: FlowState) -> float:
    # integral over (0, R) of rho u_r r^2 dr
    return float(np.sum(state.rho * state.u_r * grid.centers ** 2) * grid.h)


def _boundary_formula(params, grid, state, d_moment_dt, G) -> float:
    r, h = grid.centers, grid.h
    u2 = state.u_r ** 2 + state.u_theta ** 2
    return (d_moment_dt + np.sum(2.0 * G * r) * h - np.sum(state.rho * u2 * r) * h) / grid.R ** 2


def _check_window(states: Sequence[FlowState], need: int, what: str):
    if len(states) < need:
        raise ValueError(f"{what} needs at least {need} states, got {len(states)}")


def boundary_flux_check(params: FluidParams, grid: RadialGrid,
                        states: Sequence[FlowState]) -> np.ndarray:
    """Boundary formula for G(R, t) minus its direct extrapolation.

    One value per interior snapshot (centered time difference).
    """
    _check_window(states, 3, "boundary_flux_check")
    moments = [_radial_first_moment(grid, s) for s in states]
    out = []
    for k in range(1, len(states) - 1):
        ts = [states[k - 1].t, states[k].t, states[k + 1].t]
        w = _derivative_weights(ts, ts[1])
        dm = float(np.dot(w, moments[k - 1:k + 2]))
        G, _, GR = effective_viscous_flux(params, grid, states[k])
        out.append(_boundary_formula(params, grid, states[k], dm, G) - GR)
    return np.array(out)


def transport_structure_residual(params: FluidParams, grid: RadialGrid,
                                 states: Sequence[FlowState], floor: float = 1e-12,
                                 at: int = 1) -> np.ndarray:
    """Pointwise residual of the theta + xi transport identity at ``states[at]``."""
    _check_window(states, 3, "transport_structure_residual")
    states = list(states)[:3]
    for s in states:
        if np.any(s.rho < floor):
            raise ValueError("density below floor: theta(rho) undefined")
    phi = [theta_of_rho(params, s.rho, floor) + xi_field(grid, s) for s in states]
    ts = [s.t for s in states]
    w = _derivative_weights(ts, ts[at])
    phi_t = w[0] * phi[0] + w[1] * phi[1] + w[2] * phi[2]
    s = states[at]
    conv = s.u_r * upwind_gradient(grid, phi[at], s.u_r)
    swirl_int = inward_integral(grid, s.rho * (s.u_r ** 2 - s.u_theta ** 2) / grid.centers)[0]
    G, Pbar, GR = effective_viscous_flux(params, grid, s)
    return phi_t + conv + swirl_int + pressure(params, s.rho) - Pbar + GR


def material_derivative(grid: RadialGrid, state: FlowState, other: FlowState):
    """u_dot = d_t u + u . grad u in polar components, d_t from a two-state difference."""
    dt = state.t - other.t
    if dt == 0:
        raise ValueError("states share a time stamp")
    ur, ut, r = state.u_r, state.u_theta, grid.centers
    dur = upwind_gradient(grid, ur, ur)
    dut = upwind_gradient(grid, ut, ur)
    a_r = (ur - other.u_r) / dt + ur * dur - ut ** 2 / r
    a_t = (ut - other.u_theta) / dt + ur * dut + ur * ut / r
    return a_r, a_t


def a_functionals(params: FluidParams, grid: RadialGrid, state: FlowState,
                  state_prev: Optional[FlowState]):
    """(A1^2, A2^2, A3^2); A2 uses the time difference with ``state_prev``."""
    if state_prev is None:
        raise ValueError("a_functionals needs a second snapshot")
    mu = params.mu
    lam = bulk_viscosity(params, state.rho)
    G, _, _ = effective_viscous_flux(params, grid, state)
    w = vorticity(grid, state)
    divu = divergence(grid, state)
    a1 = integrate_disk(grid, G ** 2 / (2 * mu + lam) + mu * w ** 2)
    a3 = integrate_disk(grid, (2 * mu + lam) * divu ** 2 + mu * w ** 2)
    a_r, a_t = material_derivative(grid, state, state_prev)
    a2 = integrate_disk(grid, state.rho * (a_r ** 2 + a_t ** 2))
    return a1, a2, a3


def energy_equality_residual(ledger: Sequence[DiagRecord]) -> np.ndarray:
    """E(t) + cumulative dissipation - E(0) for each row."""
    if len(ledger) < 2:
        raise ValueError("energy_equality_residual needs at least 2 ledger rows")
    e = ledger_column(ledger, "energy")
    d = ledger_column(ledger, "dissipation_cum")
    return e + d - e[0]


# --------------------------------------------------------------------------
# streaming ledger


class LedgerBuilder:
    """Consumes every solver state in order and emits rows for flagged snapshots.

    The dissipation integral is accumulated over every step by the trapezoid
    rule, whatever the snapshot cadence.
    """

    def __init__(self, params: FluidParams, grid: RadialGrid, moment_delta: Optional[float] = None,
                 theta_floor: float = 1e-12, enforce_cap: Optional[bool] = None):
        self.params = params
        self.grid = grid
        self.moment_delta = moment_delta
        self.theta_floor = theta_floor
        self.check_cap = params.beta < 1 if enforce_cap is None else enforce_cap
        self.window = deque(maxlen=3)   # (index, state, dissipation_cum, running sup)
        self.pending = []
        self.rows = []
        self.k = -1
        self.E0 = None
        self.rho_s = None
        self._rate = None
        self._cum = 0.0
        self._sup = 0.0

    def add(self, state: FlowState, snapshot: bool = False):
        p, g = self.params, self.grid
        self.k += 1
        rate = dissipation_rate(p, g, state)
        if self.k == 0:
            self.E0 = energy(p, g, state)
            self.rho_s = mean_disk(g, state.rho)
        else:
            prev = self.window[-1][1]
            self._cum += 0.5 * (self._rate + rate) * (state.t - prev.t)
        self._rate = rate
        self._sup = max(self._sup, float(np.max(state.rho)))
        self.window.append((self.k, state, self._cum, self._sup))
        if snapshot:
            self.pending.append(self.k)
        ready = [i for i in self.pending if (i >= 1 and self.k == i + 1) or (i == 0 and self.k == 2)]
        for i in ready:
            self._emit(i)

    def finish(self):
        for i in list(self.pending):
            self._emit(i)
        return sorted(self.rows, key=lambda r: r.t)

    def _emit(self, i: int):
        self.pending.remove(i)
        entries = list(self.window)
        idx = [e[0] for e in entries]
        at = idx.index(i)
        self.rows.append(self._row(entries, at))

    def _row(self, entries, at) -> DiagRecord:
        p, g = self.params, self.grid
        _, s, cum, sup_run = entries[at]
        states = [e[1] for e in entries]
        E = energy(p, g, s)
        G, Pbar, GR = effective_viscous_flux(p, g, s)
        nan = float("nan")
        formula = transport = a2 = nan
        if len(states) >= 2:
            ts = [x.t for x in states]
            w = _derivative_weights(ts, ts[at])
            moments = [_radial_first_moment(g, x) for x in states]
            formula = _boundary_formula(p, g, s, float(np.dot(w, moments)), G)
            if len(states) == 3:
                try:
                    res = transport_structure_residual(p, g, states, self.theta_floor, at)
                    transport = lp_norm(g, res, 2)
                except ValueError:
                    transport = nan
            other = states[at - 1] if at > 0 else states[at + 1]
            a1, a2, a3 = a_functionals(p, g, s, other)
        else:
            a1, _, a3 = _a13(p, g, s)
        slack, gnorm = supnorm_slack(g, s)
        delta = self.moment_delta if self.moment_delta is not None else default_moment_delta(p, sup_run)
        sup_rho = float(np.max(s.rho))
        cap_ok = bool(sup_rho <= p.cap) if self.check_cap else True
        return DiagRecord(
            t=s.t,
            mass=integrate_disk(g, s.rho),
            energy=E,
            dissipation_cum=cum,
            energy_residual=E + cum - self.E0,
            sup_rho=sup_rho,
            G_boundary_direct=GR,
            G_boundary_formula=formula,
            transport_residual_norm=transport,
            supnorm_ineq_slack=slack,
            rho_u3=weighted_moment(g, s, 3.0),
            rho_u_2pd=weighted_moment(g, s, 2.0 + delta),
            dist_rho_L2=lp_norm(g, s.rho - self.rho_s, 2),
            dist_gradu_L2=gnorm,
            A1sq=a1,
            A2sq=a2,
            A3sq=a3,
            cap_ok=cap_ok,
        )


def _a13(params, grid, state):
    mu = params.mu
    lam = bulk_viscosity(params, state.rho)
    G, _, _ = effective_viscous_flux(params, grid, state)
    w = vorticity(grid, state)
    divu = divergence(grid, state)
    a1 = integrate_disk(grid, G ** 2 / (2 * mu + lam) + mu * w ** 2)
    a3 = integrate_disk(grid, (2 * mu + lam) * divu ** 2 + mu * w ** 2)
    return a1, float("nan"), a3


def record_dict(rec: DiagRecord) -> dict:
    return asdict(rec)
