#!/usr/bin/env python3
"""Fitted far-field decay exponents of the linear response over a (gamma, rho) sweep."""
import argparse
import itertools

import numpy as np

from suctionflow.solver import FlowConfig, solve_lp
from suctionflow.spaces import AxiVectorField, RadialProfile, SpectralMeasure
from suctionflow.verify import residual_report


def forcing(cfg):
    g = cfg.radial_grid
    p = RadialProfile.power_law(g, cfg.rho + 1)
    shape = np.exp(-0.5 * cfg.zeta_grid.nodes**2)
    dens = SpectralMeasure(g, {}, cfg.zeta_grid, 0.2 * shape[:, None] * p.values[None, :], cfg.rho + 1)
    return AxiVectorField(SpectralMeasure.cosine(1, p) + dens,
                          SpectralMeasure.atom(0, p) + SpectralMeasure.cosine(1, p),
                          SpectralMeasure.atom(0, p) + SpectralMeasure.cosine(2, p) + dens)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--gamma", type=float, nargs="+", default=[2.5, 3.0, 4.0])
    ap.add_argument("--rho-gap", type=float, nargs="+", default=[0.0, 0.5],
                    help="rho = gamma - gap")
    args = ap.parse_args()
    print(f"{'gamma':>6} {'rho':>6} {'v_r':>7} {'v_theta':>8} {'v_z':>7}  floor rho-1")
    for gamma, gap in itertools.product(args.gamma, args.rho_gap):
        rho = gamma - gap
        if rho <= 2:
            continue
        cfg = FlowConfig(gamma=gamma, rho=rho)
        f = forcing(cfg)
        d = residual_report(solve_lp(f, cfg), f, cfg).decay
        print(f"{gamma:6.2f} {rho:6.2f} {d.get('v_r', np.nan):7.2f} {d.get('v_theta', np.nan):8.2f} "
              f"{d.get('v_z', np.nan):7.2f}  {rho - 1:.2f}")


if __name__ == "__main__":
    main()
