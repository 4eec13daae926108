import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import j1, jn_zeros

from radial_swirl.diagnostics import ledger_column
from radial_swirl.grid import FluidParams, build_grid, lp_norm
from radial_swirl.physics import FlowState
from radial_swirl.presets import get_preset
from radial_swirl.solver import (
    SolverConfig, SolverError, apply_banded, implicit_viscous_update, run, stable_dt, step,
    viscous_operators,
)
from radial_swirl.studies import mms_ladder, observed_orders

P2 = FluidParams(1.0, 1.0, 2.0)


def uniform(grid, rho=1.0):
    n = grid.N
    return FlowState(0.0, rho * np.ones(n), np.zeros(n), np.zeros(n))


def test_stable_dt_vacuum_uses_cap():
    g = build_grid(100, 1.0)
    cfg = SolverConfig(t_end=1.0, dt_max=1e-3)
    assert stable_dt(P2, g, uniform(g, 0.0), cfg) == 1e-3


def test_stable_dt_acoustic_limit():
    g = build_grid(100, 1.0)
    cfg = SolverConfig(t_end=1.0, cfl=0.5, dt_max=1.0)
    assert stable_dt(P2, g, uniform(g), cfg) == pytest.approx(0.5 * 0.01 / np.sqrt(2.0), rel=1e-14)


def test_stable_dt_rejects_nan():
    g = build_grid(10, 1.0)
    s = uniform(g)
    s.rho[3] = np.nan
    with pytest.raises(SolverError):
        stable_dt(P2, g, s, SolverConfig(t_end=1.0))


@pytest.mark.parametrize("kw", [dict(cfl=0.0), dict(cfl=1.5), dict(t_end=-1.0), dict(dt_max=0.0),
                                dict(rho_floor=-1.0), dict(viscous_scheme="rk4"),
                                dict(advect_scheme="weno"), dict(snapshot_every=0)])
def test_solver_config_validation(kw):
    base = dict(t_end=1.0)
    base.update(kw)
    with pytest.raises(ValueError):
        SolverConfig(**base)


@pytest.mark.parametrize("scheme", ["crank_nicolson", "implicit_euler"])
@pytest.mark.parametrize("adv", ["muscl2", "upwind1"])
def test_equilibrium_is_a_fixed_point(scheme, adv):
    g = build_grid(64, 1.0)
    s0 = uniform(g, 1.3)
    cfg = SolverConfig(t_end=1.0, viscous_scheme=scheme, advect_scheme=adv)
    s1 = step(P2, g, s0, cfg, 0.01)
    assert np.array_equal(s1.rho, s0.rho)
    # the pressure gradient of a constant cancels to round-off only
    assert np.max(np.abs(s1.u_r)) < 1e-15 and np.max(np.abs(s1.u_theta)) == 0.0


def test_equilibrium_ledger_rows_agree():
    g = build_grid(32, 1.0)
    _, ledger = run(P2, g, uniform(g), SolverConfig(t_end=0.2, dt_max=0.02))
    E = ledger_column(ledger, "energy")
    M = ledger_column(ledger, "mass")
    assert np.ptp(E) <= 1e-12 * abs(E[0]) and np.ptp(M) <= 1e-12 * M[0]


def test_frozen_rotation_matches_bessel_mode():
    # rho = 1 frozen: u_t = mu (u'' + u'/r - u/r^2) has the decaying mode J1(k r) exp(-mu k^2 t)
    mu, T = 0.5, 0.2
    k = jn_zeros(1, 1)[0]
    errs = []
    for N in (32, 64, 128):
        g = build_grid(N, 1.0)
        _, Lt = viscous_operators(FluidParams(mu, 1.0, 2.0), g, np.ones(N))
        u = j1(k * g.centers)
        norms = [lp_norm(g, u, 2)]
        n_steps = 4 * N
        dt = T / n_steps
        for _ in range(n_steps):
            u = implicit_viscous_update(Lt, np.ones(N), u, dt, 0.5)
            norms.append(lp_norm(g, u, 2))
        assert np.all(np.diff(norms) <= 0.0)
        exact = j1(k * g.centers) * np.exp(-mu * k * k * T)
        errs.append(lp_norm(g, u - exact, 2))
    orders = observed_orders(errs)
    assert min(orders) > 1.8


def test_frozen_rotation_agrees_with_fine_step_reference():
    g = build_grid(64, 1.0)
    _, Lt = viscous_operators(FluidParams(0.3, 1.0, 2.0), g, np.ones(64))
    u0 = g.centers * (1 - g.centers ** 2) ** 3
    ref = u0.copy()
    for _ in range(2048):
        ref = implicit_viscous_update(Lt, np.ones(64), ref, 0.1 / 2048, 0.5)
    errs = []
    for n in (8, 16, 32):
        u = u0.copy()
        for _ in range(n):
            u = implicit_viscous_update(Lt, np.ones(64), u, 0.1 / n, 0.5)
        errs.append(lp_norm(g, u - ref, 2))
    assert min(observed_orders(errs)) > 1.9


def test_viscous_operator_is_dissipative():
    g = build_grid(40, 1.0)
    rng = np.random.default_rng(0)
    rho = 0.5 + rng.random(40)
    Lr, Lt = viscous_operators(FluidParams(0.7, 1.5, 2.0), g, rho)
    for L in (Lr, Lt):
        u = rng.standard_normal(40)
        assert np.dot(u * g.weights, apply_banded(L, u)) < 0.0


def test_t_end_zero_returns_initial_state():
    g = build_grid(16, 1.0)
    s0 = get_preset("decaying_swirl").initial_state(FluidParams(0.5, 1.0, 2.0), g)
    s, ledger = run(FluidParams(0.5, 1.0, 2.0), g, s0, SolverConfig(t_end=0.0))
    assert len(ledger) == 1 and s is s0


def test_run_is_deterministic():
    pr = get_preset("beta_between")
    g = build_grid(48, pr.params.R)
    cfg = SolverConfig(t_end=0.1, dt_max=0.01, **pr.solver)
    a, la = run(pr.params, g, pr.initial_state(pr.params, g), cfg)
    b, lb = run(pr.params, g, pr.initial_state(pr.params, g), cfg)
    assert np.array_equal(a.rho, b.rho) and np.array_equal(a.u_theta, b.u_theta)
    assert la == lb


def test_snapshot_every_controls_rows():
    pr = get_preset("decaying_swirl")
    g = build_grid(32, 1.0)
    s0 = pr.initial_state(pr.params, g)
    _, l1 = run(pr.params, g, s0, SolverConfig(t_end=0.025, dt_max=0.005))
    _, l3 = run(pr.params, g, s0, SolverConfig(t_end=0.025, dt_max=0.005, snapshot_every=2))
    assert len(l1) == 6
    assert [r.t for r in l3] == pytest.approx([0.0, 0.01, 0.02, 0.025])


@settings(max_examples=12, deadline=None)
@given(st.floats(0.1, 1.0), st.floats(0.5, 2.5), st.floats(1.1, 2.5),
       st.sampled_from(["crank_nicolson", "implicit_euler"]), st.integers(0, 2 ** 31 - 1))
def test_mass_is_conserved(mu, beta, gamma, scheme, seed):
    rng = np.random.default_rng(seed)
    g = build_grid(32, 1.0)
    x = g.centers
    a = rng.uniform(-0.5, 0.5, 3)
    rho = 1 + a[0] * np.cos(np.pi * x)
    s0 = FlowState(0.0, rho, a[1] * x * (1 - x * x) ** 2, a[2] * x * (1 - x))
    p = FluidParams(mu, beta, gamma)
    _, ledger = run(p, g, s0, SolverConfig(t_end=0.05, dt_max=0.005, viscous_scheme=scheme))
    M = ledger_column(ledger, "mass")
    assert np.max(np.abs(M - M[0])) <= 1e-12 * M[0]


def test_density_floor_is_respected():
    g = build_grid(32, 1.0)
    x = g.centers
    s0 = FlowState(0.0, np.where(x < 0.5, 1.0, 0.0), np.zeros(32), 0.5 * x * (1 - x))
    s, _ = run(P2, g, s0, SolverConfig(t_end=0.05, dt_max=0.005, rho_floor=1e-6), diagnostics=False)
    assert s.rho.min() >= 1e-6


def test_upwind_mms_tends_to_first_order():
    # The error behaves like a h - b h^2 with a, b > 0, so the observed order
    # approaches 1 from below: the deficit 1 - p roughly halves per level.
    res = mms_ladder(FluidParams(1.0, 1.0, 2.0), N0=64, levels=3, t_end=1.0, advect_scheme="upwind1",
                     viscous_scheme="implicit_euler")
    for name in ("err_rho", "err_ur", "err_utheta"):
        p = observed_orders([getattr(r, name) for r in res])
        assert p[-1] >= 0.95, (name, p)
        deficits = [max(1.0 - q, 0.0) for q in p]
        assert deficits[1] <= deficits[0] / 1.6 or deficits[1] < 0.01, (name, p)


def test_non_finite_error_reports_time():
    g = build_grid(16, 1.0)
    s0 = uniform(g)
    s0.u_r[4] = np.inf
    with pytest.raises(SolverError) as info:
        run(P2, g, s0, SolverConfig(t_end=0.1))
    assert info.value.t == 0.0
