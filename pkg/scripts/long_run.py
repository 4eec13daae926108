"""Long run of a preset, printing the distance to equilibrium as it decays.

    python scripts/long_run.py beta_ge_1_large --t-end 50
"""

import argparse

from radial_swirl.grid import build_grid
from radial_swirl.presets import get_preset
from radial_swirl.solver import SolverConfig, run


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("preset")
    ap.add_argument("--N", type=int, default=256)
    ap.add_argument("--t-end", type=float, default=50.0)
    ap.add_argument("--dt-max", type=float, default=0.05)
    ap.add_argument("--every", type=int, default=100, help="steps between printed rows")
    args = ap.parse_args()

    pr = get_preset(args.preset)
    g = build_grid(args.N, pr.params.R)
    s0 = pr.initial_state(pr.params, g)
    cfg = SolverConfig(t_end=args.t_end, dt_max=args.dt_max, snapshot_every=args.every, **pr.solver)
    _, ledger = run(pr.params, g, s0, cfg)
    print(f"{'t':>8} {'|rho - rho_s|':>14} {'|grad u|':>12} {'sup rho':>10} {'energy':>12}")
    for r in ledger:
        print(f"{r.t:8.2f} {r.dist_rho_L2:14.4e} {r.dist_gradu_L2:12.4e} {r.sup_rho:10.4f} {r.energy:12.6f}")


if __name__ == "__main__":
    main()
