#!/usr/bin/env python3
"""Solver vs finite-difference oracle on the three closed-form zeta = 0 problems.

Prints the oracle error at several resolutions (without Richardson) so the
second-order rate is visible, then the extrapolated oracle against the solver.
"""
import argparse

import numpy as np

from suctionflow.solver import solve_stream_mode, solve_swirl_mode, solve_vorticity_mode
from suctionflow.spaces import RadialGrid, RadialProfile
from suctionflow.verify import OracleProblem, fd_oracle_mode

CASES = {
    "stream": (OracleProblem("stream", 0, 3.0, lambda s: s**-4.0, 4.0), lambda r: (1 / r - 1 / r**2) / 3),
    "vorticity": (OracleProblem("vorticity", 0, 3.0, lambda s: 4 * s**-5.0, 5.0), lambda r: r**-3 - 1.5 * r**-4),
    "swirl": (OracleProblem("swirl", 0, 3.0, lambda s: s**-3.5, 3.5), lambda r: 4 * (r**-1.5 - r**-2)),
}


def solver_mode(name, g):
    if name == "stream":
        return solve_stream_mode(RadialProfile.power_law(g, 4.0), 0)[0]
    if name == "vorticity":
        return solve_vorticity_mode(RadialProfile.zeros(g), RadialProfile.power_law(g, 4.0), 0, 3.0)
    return solve_swirl_mode(RadialProfile.power_law(g, 3.5), 0, 3.0)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--levels", type=int, nargs="+", default=[2049, 4097, 8193, 16385])
    args = ap.parse_args()
    g = RadialGrid()
    r = g.nodes
    for name, (prob, exact) in CASES.items():
        errs = [np.max(np.abs(fd_oracle_mode(prob, g, n=n, richardson=False).values - exact(r)))
                for n in args.levels]
        rates = ["-"] + [f"{a / b:.2f}" for a, b in zip(errs, errs[1:])]
        print(f"{name}:")
        for n, e, q in zip(args.levels, errs, rates):
            print(f"  n={n:6d}  err={e:.3e}  ratio={q}")
        ref = fd_oracle_mode(prob, g)
        gap = np.max(np.abs(solver_mode(name, g).values - ref.values))
        print(f"  extrapolated oracle vs exact {np.max(np.abs(ref.values - exact(r))):.2e}, vs solver {gap:.2e}")


if __name__ == "__main__":
    main()
