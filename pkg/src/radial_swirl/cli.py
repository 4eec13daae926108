"""Command-line front end: run, refine, threshold, mms and compat subcommands.

Exit codes: 0 ok, 2 configuration error, 3 solver failure, 4 invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import os
import sys
from dataclasses import replace
from typing import List, Optional, Sequence

import numpy as np

from .config import ConfigError, RunConfig, load_config
from .diagnostics import LEDGER_COLUMNS, DiagRecord
from .grid import build_grid, mean_disk
from .initial_data import grad_u0_norm, mollify_density, solve_compatibility_velocity
from .physics import FlowState
from .presets import get_preset
from .solver import SolverError, run
from .studies import mms_ladder, observed_orders, refinement_ladder
from .threshold import ThresholdInputs, admissibility_verdict, solve_a0, TERM_NAMES

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_INVARIANT = 0, 2, 3, 4
MASS_TOL = 1e-12

log = logging.getLogger("radial_swirl")


class ProfileError(ValueError):
    pass


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    return "%.17g" % x


def ledger_csv(ledger: Sequence[DiagRecord], columns: Sequence[str] = LEDGER_COLUMNS) -> str:
    buf = io.StringIO()
    buf.write(",".join(columns) + "\n")
    for rec in ledger:
        buf.write(",".join(fmt(getattr(rec, c)) for c in columns) + "\n")
    return buf.getvalue()


def read_table(path: str, columns: Sequence[str]) -> np.ndarray:
    """Read a CSV with the given header; rows are validated as finite numbers."""
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise ProfileError(f"cannot read {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader, [])]
        if header != list(columns):
            raise ProfileError(f"{path}: expected header {','.join(columns)}, got {','.join(header)}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                vals = [float(c) for c in row]
            except ValueError:
                raise ProfileError(f"{path}: row {lineno} is not numeric: {row}") from None
            if len(vals) != len(columns):
                raise ProfileError(f"{path}: row {lineno} has {len(vals)} fields")
            if not all(np.isfinite(vals)):
                raise ProfileError(f"{path}: row {lineno} has a non-finite value: {row}")
            rows.append(vals)
    if len(rows) < 2:
        raise ProfileError(f"{path}: need at least 2 data rows")
    data = np.array(rows)
    if np.any(np.diff(data[:, 0]) <= 0):
        raise ProfileError(f"{path}: radii must be strictly increasing")
    return data


def load_profile(path: str, grid) -> FlowState:
    data = read_table(path, ("r", "rho0", "ur0", "utheta0"))
    r = grid.centers
    rho = np.interp(r, data[:, 0], data[:, 1])
    if np.any(rho < 0):
        raise ProfileError(f"{path}: negative density")
    return FlowState(0.0, rho, np.interp(r, data[:, 0], data[:, 2]),
                     np.interp(r, data[:, 0], data[:, 3]))


def initial_state(cfg: RunConfig, grid) -> FlowState:
    if cfg.preset:
        return get_preset(cfg.preset).initial_state(cfg.params, grid)
    if cfg.profile_path:
        return load_profile(cfg.profile_path, grid)
    n = grid.N
    return FlowState(0.0, np.ones(n), np.zeros(n), np.zeros(n))


def _initial_builder(cfg: RunConfig):
    if cfg.preset:
        return get_preset(cfg.preset).initial_state
    return lambda params, grid: load_profile(cfg.profile_path, grid)


def _write(path: Optional[str], text: str, out=sys.stdout):
    if path:
        d = os.path.dirname(os.path.abspath(path))
        os.makedirs(d, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        out.write(text)


# --------------------------------------------------------------------------
# drivers


def run_single(cfg: RunConfig, out: Optional[str] = None) -> int:
    grid = build_grid(cfg.N, cfg.params.R)
    try:
        s0 = initial_state(cfg, grid)
    except ProfileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    solver = cfg.resolved_solver(mean_disk(grid, s0.rho))
    try:
        _, ledger = run(cfg.params, grid, s0, solver)
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    _write(out or cfg.out, ledger_csv(ledger, cfg.columns))

    status = EXIT_OK
    M = np.array([r.mass for r in ledger])
    if M[0] > 0 and np.max(np.abs(M - M[0])) / M[0] > MASS_TOL:
        print("invariant violated: mass drift above 1e-12", file=sys.stderr)
        status = EXIT_INVARIANT
    if cfg.params.beta < 1:
        p = cfg.params
        du = grad_u0_norm(grid, s0.u_r, s0.u_theta)
        verdict = admissibility_verdict(ThresholdInputs(p.mu, p.beta, p.gamma, p.R, du),
                                        float(np.max(s0.rho)))
        log.info("initial data %s (sup rho0 = %.6g, a0 = %.6g)", verdict.label,
                 verdict.rho0_sup, verdict.a0)
        if verdict.admitted and not all(r.cap_ok for r in ledger):
            print("invariant violated: density cap exceeded on an admitted run", file=sys.stderr)
            status = EXIT_INVARIANT
    return status


def run_refinement(cfg: RunConfig, out: Optional[str] = None) -> int:
    try:
        levels = refinement_ladder(cfg.params, _initial_builder(cfg), cfg.solver, cfg.N, cfg.levels,
                                   floor_factor=1e-10 if cfg.rho_floor_auto else None)
    except (SolverError, ProfileError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    names = ("energy_residual", "boundary_discrepancy", "transport_residual")
    lines = ["N,dt_max," + ",".join(names) + "," + ",".join(f"order_{n}" for n in names)]
    orders = {n: [float("nan")] + observed_orders([getattr(l, n) for l in levels]) for n in names}
    for k, lev in enumerate(levels):
        cells = [str(lev.N), fmt(lev.dt_max)] + [fmt(getattr(lev, n)) for n in names]
        for n in names:
            o = orders[n][k]
            cells.append("" if k == 0 else ("saturated" if np.isnan(o) else fmt(o)))
        lines.append(",".join(cells))
    _write(out or cfg.out, "\n".join(lines) + "\n")
    return EXIT_OK


def run_threshold(cfg: RunConfig, csv_path: Optional[str] = None) -> int:
    p = cfg.params
    if not p.beta < 1:
        print(f"error: beta = {p.beta} >= 1; the threshold a0 is only defined for 0 < beta < 1 "
              "(for beta >= 1 no smallness condition on the initial density is needed)",
              file=sys.stderr)
        return EXIT_CONFIG
    grid = build_grid(cfg.N, p.R)
    du = 0.0
    rho_sup = None
    if cfg.preset or cfg.profile_path:
        try:
            s0 = initial_state(cfg, grid)
        except ProfileError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        du = grad_u0_norm(grid, s0.u_r, s0.u_theta)
        rho_sup = float(np.max(s0.rho))
    inputs = ThresholdInputs(p.mu, p.beta, p.gamma, p.R, du)
    rep = solve_a0(inputs)
    print(f"mu={p.mu:g} beta={p.beta:g} gamma={p.gamma:g} R={p.R:g} grad_u0_L2={du:.10g}")
    print(f"a0         = {rep.a0:.12g}")
    print(f"cap        = {rep.cap:.12g}")
    print(f"sharp cap  = {rep.sharp_cap:.12g}")
    print(f"target     = {rep.target:.12g}")
    print(f"K(a0)      = {rep.K_a0:.12g}")
    print(f"residual   = {rep.residual:.3e}")
    print(f"iterations = {rep.iterations}")
    for name in TERM_NAMES:
        print(f"  {name:18s} {rep.terms[name]:.12g}")
    if rho_sup is not None:
        v = admissibility_verdict(inputs, rho_sup, rep)
        print(f"verdict    = {v.label} (sup rho0 = {rho_sup:.12g})")
    path = csv_path or cfg.out
    if path:
        header = ["mu", "beta", "gamma", "R", "grad_u0_L2", "a0", "cap", "target", "K_a0",
                  "residual", "iterations"] + list(TERM_NAMES)
        row = [p.mu, p.beta, p.gamma, p.R, du, rep.a0, rep.cap, rep.target, rep.K_a0,
               rep.residual, rep.iterations] + [rep.terms[n] for n in TERM_NAMES]
        new = not os.path.exists(path) or os.path.getsize(path) == 0
        with open(path, "a", encoding="utf-8", newline="") as fh:
            if new:
                fh.write(",".join(header) + "\n")
            fh.write(",".join(fmt(x) if not isinstance(x, int) else str(x) for x in row) + "\n")
    return EXIT_OK


def run_mms(cfg: RunConfig, out: Optional[str] = None) -> int:
    try:
        levels = mms_ladder(cfg.params, N0=cfg.N, levels=cfg.levels, t_end=cfg.solver.t_end,
                            dt_factor=cfg.solver.dt_max * cfg.N / cfg.params.R,
                            viscous_scheme=cfg.solver.viscous_scheme,
                            advect_scheme=cfg.solver.advect_scheme)
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    names = ("err_rho", "err_ur", "err_utheta")
    orders = {n: [float("nan")] + observed_orders([getattr(l, n) for l in levels]) for n in names}
    lines = ["N,dt_max," + ",".join(names) + "," + ",".join(f"order_{n[4:]}" for n in names)]
    for k, lev in enumerate(levels):
        cells = [str(lev.N), fmt(lev.dt_max)] + [fmt(getattr(lev, n)) for n in names]
        cells += ["" if k == 0 else fmt(orders[n][k]) for n in names]
        lines.append(",".join(cells))
    _write(out or cfg.out, "\n".join(lines) + "\n")
    return EXIT_OK


def run_compat(cfg: RunConfig, forcing: Optional[str], delta: Optional[float],
               out: Optional[str] = None) -> int:
    grid = build_grid(cfg.N, cfg.params.R)
    try:
        s0 = initial_state(cfg, grid)
        rho0 = s0.rho
        if delta is not None:
            rho0 = mollify_density(grid, rho0, delta)
        if forcing:
            data = read_table(forcing, ("r", "g_r", "g_theta"))
            g = (np.interp(grid.centers, data[:, 0], data[:, 1]),
                 np.interp(grid.centers, data[:, 0], data[:, 2]))
        else:
            g = (np.zeros(grid.N), np.zeros(grid.N))
        ur, ut = solve_compatibility_velocity(cfg.params, grid, rho0, g)
    except (ProfileError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    lines = ["r,rho0,ur0,utheta0"]
    lines += [",".join(fmt(x) for x in row) for row in zip(grid.centers, rho0, ur, ut)]
    _write(out or cfg.out, "\n".join(lines) + "\n")
    return EXIT_OK


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="radial-swirl", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, help_ in (("run", "single run, writes the ledger CSV"),
                        ("refine", "identity residuals under joint (h, dt) refinement"),
                        ("threshold", "solve for a0 and print the K-terms"),
                        ("mms", "manufactured-solution convergence table"),
                        ("compat", "solve the compatibility system for the initial velocity")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("config", help="YAML configuration file")
        p.add_argument("-o", "--out", help="output path (overrides 'out' in the config)")
        if name == "threshold":
            p.add_argument("--csv", help="append a machine-readable row to this CSV")
        if name == "compat":
            p.add_argument("--forcing", help="CSV with header r,g_r,g_theta (default: g = 0)")
            p.add_argument("--delta", type=float, help="mollify rho0 with this width first")
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.command == "run":
        return run_single(cfg, args.out)
    if args.command == "refine":
        return run_refinement(cfg, args.out)
    if args.command == "threshold":
        if args.out and not args.csv:
            args.csv = args.out
        return run_threshold(cfg, args.csv)
    if args.command == "mms":
        return run_mms(cfg, args.out)
    return run_compat(cfg, args.forcing, args.delta, args.out)


if __name__ == "__main__":
    sys.exit(main())
