"""Time integration of the radial compressible Navier-Stokes system with swirl.

Conserved variables (rho, rho u_r, rho u_theta) are cell averages in the
measure r dr. The inviscid part (Rusanov fluxes on piecewise-constant
``upwind1`` or van Leer limited linear ``muscl2`` reconstructions, geometric
sources, pressure) is treated explicitly; the two viscous operators
d_r((2 mu + lambda) (d_r u_r + u_r / r)) and mu d_r(d_r u_theta + u_theta / r)
are treated implicitly, with the trapezoid rule (``crank_nicolson``) or
backward Euler (``implicit_euler``). The two parts are advanced together in a
two-stage IMEX step rather than split, so a steady balance between pressure
and viscous stress near the wall is reproduced without a splitting defect.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np
from scipy.linalg import solve_banded

from .grid import FluidParams, RadialGrid
from .physics import FlowState, bulk_viscosity, pressure

VISCOUS_SCHEMES = ("implicit_euler", "crank_nicolson")
ADVECT_SCHEMES = ("upwind1", "muscl2")


class SolverError(RuntimeError):
    """Raised when a step produces non-finite fields or a linear solve fails."""

    def __init__(self, message: str, t: Optional[float] = None):
        self.t = t
        super().__init__(message if t is None else f"{message} (t={t:.17g})")


@dataclass(frozen=True)
class SolverConfig:
    t_end: float
    cfl: float = 0.4
    dt_max: float = 1e-2
    rho_floor: float = 0.0
    viscous_scheme: str = "crank_nicolson"
    advect_scheme: str = "muscl2"
    snapshot_every: int = 1

    def __post_init__(self):
        if not 0 < self.cfl <= 1:
            raise ValueError(f"cfl must lie in (0, 1], got {self.cfl!r}")
        if not self.t_end >= 0:
            raise ValueError(f"t_end must be >= 0, got {self.t_end!r}")
        if not self.dt_max > 0:
            raise ValueError(f"dt_max must be > 0, got {self.dt_max!r}")
        if not self.rho_floor >= 0:
            raise ValueError(f"rho_floor must be >= 0, got {self.rho_floor!r}")
        if self.viscous_scheme not in VISCOUS_SCHEMES:
            raise ValueError(f"viscous_scheme must be one of {VISCOUS_SCHEMES}")
        if self.advect_scheme not in ADVECT_SCHEMES:
            raise ValueError(f"advect_scheme must be one of {ADVECT_SCHEMES}")
        if int(self.snapshot_every) != self.snapshot_every or self.snapshot_every < 1:
            raise ValueError("snapshot_every must be a positive integer")


SourceFn = Callable[[np.ndarray, float], np.ndarray]


@dataclass(frozen=True)
class MmsSource:
    """Forcing added to the right-hand sides of the mass and momentum equations."""

    s_mass: SourceFn
    s_mom_r: SourceFn
    s_mom_theta: SourceFn

    def __call__(self, r: np.ndarray, t: float):
        shape = np.shape(r)
        return tuple(np.broadcast_to(np.asarray(f(r, t), dtype=float), shape)
                     for f in (self.s_mass, self.s_mom_r, self.s_mom_theta))


# --------------------------------------------------------------------------
# time step


def sound_speed(params: FluidParams, rho: np.ndarray) -> np.ndarray:
    return np.sqrt(params.gamma * np.maximum(rho, 0.0) ** (params.gamma - 1.0))


def stable_dt(params: FluidParams, grid: RadialGrid, state: FlowState, config: SolverConfig) -> float:
    if not state.is_finite():
        raise SolverError("non-finite field in state", state.t)
    speed = float(np.max(np.abs(state.u_r) + sound_speed(params, state.rho)))
    if speed <= 0.0:
        return config.dt_max
    return min(config.dt_max, config.cfl * grid.h / speed)


# --------------------------------------------------------------------------
# inviscid part


def _limited_slope(q: np.ndarray) -> np.ndarray:
    """van Leer slopes for the interior cells of a padded array (length - 2)."""
    a = q[1:-1] - q[:-2]
    b = q[2:] - q[1:-1]
    ab = a * b
    out = np.zeros_like(ab)
    pos = ab > 0
    out[pos] = 2.0 * ab[pos] / (a[pos] + b[pos])
    return out


def _pad2(q: np.ndarray, parity: float) -> np.ndarray:
    """Two ghosts per side.

    ``parity`` = -1: odd about r = 0, and beyond r = R the quadratic through
    the wall value 0 and the last two centers (velocities). ``parity`` = +1:
    even about r = 0, linear extrapolation beyond r = R (density, which has
    no wall condition).
    """
    if parity < 0:
        wall = np.array([-2.0 * q[-1] + q[-2] / 3.0, -9.0 * q[-1] + 2.0 * q[-2]])
        return np.concatenate((-q[1::-1], q, wall))
    d = q[-1] - q[-2]
    wall = np.maximum(q[-1] + d * np.array([1.0, 2.0]), 0.0)
    return np.concatenate((q[1::-1], q, wall))


def _face_states(q: np.ndarray, parity: float, second_order: bool):
    """Left/right states at the N + 1 faces."""
    qp = _pad2(q, parity)
    if second_order:
        s = _limited_slope(qp)          # slopes for padded cells 1 .. N+2
        qc = qp[1:-1]
        left = qc[:-1] + 0.5 * s[:-1]   # cell j - 1 at face j
        right = qc[1:] - 0.5 * s[1:]    # cell j at face j
    else:
        left = qp[1:-2]
        right = qp[2:-1]
    return left, right


def inviscid_rhs(params: FluidParams, grid: RadialGrid, rho, u_r, u_t, t: float,
                 second_order: bool, mms: Optional[MmsSource] = None):
    """Time derivative of (rho, rho u_r, rho u_theta) from the inviscid terms."""
    gam = params.gamma
    rl, rr = _face_states(rho, 1.0, second_order)
    ul, ur = _face_states(u_r, -1.0, second_order)
    wl, wr = _face_states(u_t, -1.0, second_order)
    rl = np.maximum(rl, 0.0)
    rr = np.maximum(rr, 0.0)
    pl, pr = rl ** gam, rr ** gam
    cl = np.sqrt(gam * rl ** (gam - 1.0))
    cr = np.sqrt(gam * rr ** (gam - 1.0))
    a = np.maximum(np.abs(ul) + cl, np.abs(ur) + cr)

    ml, mr = rl * ul, rr * ur
    f_mass = 0.5 * (ml + mr) - 0.5 * a * (rr - rl)
    f_mr = 0.5 * (ml * ul + pl + mr * ur + pr) - 0.5 * a * (mr - ml)
    f_mt = 0.5 * (ml * wl + mr * wr) - 0.5 * a * (rr * wr - rl * wl)
    f_mass[0] = f_mass[-1] = 0.0

    rf = grid.faces
    vol = grid.centers * grid.h
    d_rho = -np.diff(rf * f_mass) / vol
    d_mr = -np.diff(rf * f_mr) / vol
    d_mt = -np.diff(rf * f_mt) / vol

    r = grid.centers
    P = rho ** gam
    d_mr += (rho * u_t * u_t + P) / r
    d_mt -= rho * u_r * u_t / r
    if mms is not None:
        sm, sr, st = mms(r, t)
        d_rho = d_rho + sm
        d_mr = d_mr + sr
        d_mt = d_mt + st
    return d_rho, d_mr, d_mt


# --------------------------------------------------------------------------
# viscous part


def face_coefficients(params: FluidParams, rho: np.ndarray) -> tuple:
    """Face values of (2 mu + lambda) and mu for the two viscous operators."""
    lam = bulk_viscosity(params, rho)
    lam_f = np.empty(lam.size + 1)
    lam_f[1:-1] = 0.5 * (lam[:-1] + lam[1:])
    lam_f[0] = lam[0]
    lam_f[-1] = max(1.5 * lam[-1] - 0.5 * lam[-2], 0.0)
    return 2.0 * params.mu + lam_f, np.full_like(lam_f, params.mu)


def viscous_matrix(grid: RadialGrid, coef_f: np.ndarray) -> np.ndarray:
    """Banded form, one upper and two lower diagonals, of L u = d_r(c (1/r) d_r(r u)).

    Face values of (1/r) d_r(r u): centered in the interior, 4 u_0 / h at r = 0
    and the one-sided cubic through u(R) = 0 and the last three centers at the
    wall (the only entry on the second lower diagonal). Every row is strictly
    diagonally dominant with a negative diagonal, so rho / dt - theta L is
    nonsingular for any dt.
    """
    h, r, f = grid.h, grid.centers, grid.faces
    N = grid.N
    # Q_j = a_j u_j - b_j u_{j-1}  (interior faces j = 1..N-1)
    a = np.zeros(N + 1)
    b = np.zeros(N + 1)
    a[1:N] = coef_f[1:N] * r[1:] / (f[1:N] * h)
    b[1:N] = coef_f[1:N] * r[:-1] / (f[1:N] * h)
    q0 = coef_f[0] * 4.0 / h                     # Q_0 = q0 u_0
    # Q_N = sum_k wall[k] u_{N-1-k}
    cw = coef_f[N] / (grid.R * h)
    wall = cw * np.array([-15.0 / 4.0, 5.0 / 6.0, -3.0 / 20.0]) * r[-1:-4:-1]

    ab = np.zeros((4, N))
    # L u_i = (Q_{i+1} - Q_i) / h
    diag = np.empty(N)
    diag[:-1] = -b[1:N]
    diag[-1] = wall[0]
    diag[1:] -= a[1:N]
    diag[0] -= q0
    ab[1] = diag / h
    ab[0, 1:] = a[1:N] / h          # upper: u_{i+1} via Q_{i+1}
    ab[2, :-1] = b[1:N] / h         # lower: u_{i-1} via -Q_i
    ab[2, -2] += wall[1] / h
    ab[3, -3] = wall[2] / h         # second lower: u_{N-3} in the last row
    return ab


BANDS = (2, 1)


def apply_banded(ab: np.ndarray, u: np.ndarray) -> np.ndarray:
    out = ab[1] * u
    out[:-1] += ab[0, 1:] * u[1:]
    out[1:] += ab[2, :-1] * u[:-1]
    out[2:] += ab[3, :-2] * u[:-2]
    return out


def viscous_operators(params: FluidParams, grid: RadialGrid, rho: np.ndarray):
    """Banded matrices of the radial and swirl viscous operators at density ``rho``."""
    c_r, c_t = face_coefficients(params, rho)
    return viscous_matrix(grid, c_r), viscous_matrix(grid, c_t)


def _momentum_solve(ab_L, rho_new, rhs, dt, theta, t):
    """Solve (rho_new / dt - theta L) u = rhs / dt for the new velocity."""
    A = -theta * ab_L
    A[1] += rho_new / dt
    try:
        out = solve_banded(BANDS, A, rhs / dt, check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SolverError(f"viscous tridiagonal solve failed: {exc}", t) from exc
    if not np.all(np.isfinite(out)):
        raise SolverError("viscous tridiagonal solve returned non-finite values", t)
    return out


def implicit_viscous_update(ab_L, rho, u, dt: float, theta: float) -> np.ndarray:
    """Theta-method step of rho u_t = L u at fixed density."""
    rhs = rho * u
    if theta < 1.0:
        rhs = rhs + dt * (1.0 - theta) * apply_banded(ab_L, u)
    return _momentum_solve(ab_L, rho, rhs, dt, theta, None)


# --------------------------------------------------------------------------
# full step and driver


def step(params: FluidParams, grid: RadialGrid, state: FlowState, config: SolverConfig,
         dt: float, mms: Optional[MmsSource] = None) -> FlowState:
    """Advance one step of size ``dt``.

    Two stages: a predictor with the explicit tendency at t^n, then a
    corrector with the average of the tendencies at t^n and at the predictor.
    The density is updated explicitly first in each stage, so the viscous
    operator of the stage is built from the already updated density and the
    momentum solve stays linear and tridiagonal.
    """
    second = config.advect_scheme == "muscl2"
    theta = 0.5 if config.viscous_scheme == "crank_nicolson" else 1.0
    t0 = state.t
    rho0, u0, w0 = state.rho, state.u_r, state.u_theta
    F0 = inviscid_rhs(params, grid, rho0, u0, w0, t0, second, mms)
    if theta < 1.0:
        Lr0, Lt0 = viscous_operators(params, grid, rho0)
        expl_r = rho0 * u0 + dt * (1.0 - theta) * apply_banded(Lr0, u0)
        expl_t = rho0 * w0 + dt * (1.0 - theta) * apply_banded(Lt0, w0)
    else:
        expl_r, expl_t = rho0 * u0, rho0 * w0

    rho1 = np.maximum(rho0 + dt * F0[0], 0.0)
    Lr1, Lt1 = viscous_operators(params, grid, rho1)
    u1 = _momentum_solve(Lr1, rho1, expl_r + dt * F0[1], dt, theta, t0)
    w1 = _momentum_solve(Lt1, rho1, expl_t + dt * F0[2], dt, theta, t0)

    F1 = inviscid_rhs(params, grid, rho1, u1, w1, t0 + dt, second, mms)
    rho2 = np.maximum(rho0 + 0.5 * dt * (F0[0] + F1[0]), 0.0)
    Lr2, Lt2 = viscous_operators(params, grid, rho2)
    u2 = _momentum_solve(Lr2, rho2, expl_r + 0.5 * dt * (F0[1] + F1[1]), dt, theta, t0)
    w2 = _momentum_solve(Lt2, rho2, expl_t + 0.5 * dt * (F0[2] + F1[2]), dt, theta, t0)

    if config.rho_floor > 0:
        rho2 = np.maximum(rho2, config.rho_floor)
    s = FlowState(t0 + dt, rho2, u2, w2)
    if not s.is_finite():
        raise SolverError("non-finite field after step", t0)
    return s


def run(params: FluidParams, grid: RadialGrid, state0: FlowState, config: SolverConfig,
        mms: Optional[MmsSource] = None, diagnostics: bool = True, ledger_options=None):
    """Advance ``state0`` to ``config.t_end``.

    Returns ``(final_state, ledger)`` where ``ledger`` is a list of
    :class:`~radial_swirl.diagnostics.DiagRecord` (empty when ``diagnostics``
    is false).
    """
    from .diagnostics import LedgerBuilder

    builder = LedgerBuilder(params, grid, **(ledger_options or {})) if diagnostics else None
    state = state0
    if builder is not None:
        builder.add(state, snapshot=True)
    t_end = config.t_end
    k = 0
    while t_end - state.t > 1e-12 * max(1.0, t_end):
        try:
            dt = stable_dt(params, grid, state, config)
            if state.t + dt >= t_end - 1e-9 * dt:
                dt = t_end - state.t
            new = step(params, grid, state, config, dt, mms)
        except SolverError as exc:
            if exc.t is None:
                exc = SolverError(str(exc), state.t)
            raise exc
        k += 1
        state = new
        if builder is not None:
            last = t_end - state.t <= 1e-12 * max(1.0, t_end)
            builder.add(state, snapshot=last or k % config.snapshot_every == 0)
    ledger = builder.finish() if builder is not None else []
    return state, ledger
