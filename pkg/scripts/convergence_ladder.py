"""Identity residuals of one preset under joint (h, dt) refinement.

    python scripts/convergence_ladder.py decaying_swirl --levels 4
"""

import argparse
import time

from radial_swirl.presets import get_preset
from radial_swirl.solver import SolverConfig
from radial_swirl.studies import observed_orders, refinement_ladder


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("preset")
    ap.add_argument("--N0", type=int, default=64)
    ap.add_argument("--levels", type=int, default=4)
    ap.add_argument("--t-end", type=float, default=0.5)
    ap.add_argument("--dt-factor", type=float, default=0.25, help="dt_max = factor * R / N")
    ap.add_argument("--scheme", default="crank_nicolson", choices=["crank_nicolson", "implicit_euler"])
    args = ap.parse_args()

    pr = get_preset(args.preset)
    cfg = SolverConfig(t_end=args.t_end, dt_max=args.dt_factor * pr.params.R / args.N0,
                       viscous_scheme=args.scheme, advect_scheme=pr.solver.get("advect_scheme", "muscl2"))
    t0 = time.perf_counter()
    levels = refinement_ladder(pr.params, pr.initial_state, cfg, args.N0, args.levels)
    names = ("energy_residual", "boundary_discrepancy", "transport_residual")
    orders = {n: [None] + observed_orders([getattr(l, n) for l in levels]) for n in names}
    print(f"{'N':>5} {'dt_max':>10} " + " ".join(f"{n:>22}" for n in names))
    for k, lev in enumerate(levels):
        cells = []
        for n in names:
            o = orders[n][k]
            cells.append(f"{getattr(lev, n):12.4e}" + (f" ({o:5.2f})" if o is not None else " " * 8))
        print(f"{lev.N:5d} {lev.dt_max:10.3e} " + " ".join(f"{c:>22}" for c in cells))
    print(f"ladder time {time.perf_counter() - t0:.1f}s")


if __name__ == "__main__":
    main()
