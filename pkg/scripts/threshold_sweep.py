"""Solve for a0 over a (mu, beta, gamma) grid and write a CSV of reports."""

import argparse
import csv
import itertools
import sys

import numpy as np

from radial_swirl.threshold import TERM_NAMES, ThresholdInputs, is_strictly_increasing, solve_a0


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--mu", type=float, nargs="+", default=[0.5, 1.0, 2.0])
    ap.add_argument("--beta", type=float, nargs="+", default=[0.25, 0.5, 0.75])
    ap.add_argument("--gamma", type=float, nargs="+", default=[1.5, 2.0, 3.0])
    ap.add_argument("--R", type=float, default=1.0)
    ap.add_argument("--grad-u0", type=float, nargs="+", default=[0.0, 1.0])
    ap.add_argument("--out", help="CSV path (default: stdout)")
    args = ap.parse_args()

    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    w = csv.writer(fh)
    w.writerow(["mu", "beta", "gamma", "R", "grad_u0_L2", "a0", "cap", "residual", "iterations",
                "monotone"] + list(TERM_NAMES))
    for du, mu, beta, gamma in itertools.product(args.grad_u0, args.mu, args.beta, args.gamma):
        inp = ThresholdInputs(mu, beta, gamma, args.R, du)
        rep = solve_a0(inp)
        mono = is_strictly_increasing(inp, rep.a0 * np.logspace(-4, 1, 50))
        w.writerow([mu, beta, gamma, args.R, du, "%.17g" % rep.a0, "%.17g" % rep.cap,
                    "%.3e" % rep.residual, rep.iterations, int(mono)]
                   + ["%.17g" % rep.terms[n] for n in TERM_NAMES])
    if args.out:
        fh.close()


if __name__ == "__main__":
    main()
