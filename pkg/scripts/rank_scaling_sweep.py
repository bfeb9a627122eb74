#!/usr/bin/env python3
"""Fit high-power rate slopes for the coded and MIMO setups and compare them
with the closed-form prelog predictions.

Usage: python3 scripts/rank_scaling_sweep.py [--points N]
"""

import argparse
import math

import numpy as np

from specshape import (CodedScenario, MimoChannel, coded_prelog, make_grid,
                       mimo_prelog, solve_coded, solve_mimo)


def coded_scenario(a_c, P, load=0.5):
    R_l = load * math.log1p(1.0 * 1000.0 / 1.0)
    return CodedScenario(a_l=1.0, g_l=1.0, a_c=a_c, g_c=10.0, sigma2_s=1000.0,
                         sigma2_nl=1.0, sigma2_nc=1.0, R_l=R_l, P=P)


def mimo_channel(H, load=0.5):
    H = np.atleast_2d(np.asarray(H, dtype=complex))
    n_r, n_t = H.shape
    R_l = load * math.log1p(1.0 * 1000.0 / 1.0)
    return MimoChannel(H_c=H, h_l=np.ones(n_t) / math.sqrt(n_t),
                       h_c=(np.arange(n_r) == 0).astype(float),
                       a_l=1.0, g_l=1.0, a_c=1.0, g_c=10.0, sigma2_s=1000.0,
                       sigma2_nl=1.0, sigma2_nc=1.0, R_l=R_l)


def fitted_slope(powers, rates):
    return float(np.polyfit(np.log(powers), rates, 1)[0])


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--points", type=int, default=9)
    args = ap.parse_args()
    powers = np.geomspace(1e4, 1e8, args.points)
    grid = make_grid(64)

    for label, a_c in (("coded case A (a_c = -20 dB)", 0.01),
                       ("coded case B (a_c =   0 dB)", 1.0)):
        sc = coded_scenario(a_c, 1.0)
        slope = fitted_slope(powers, [solve_coded(coded_scenario(a_c, p)).rate
                                      for p in powers])
        print(f"{label}: slope {slope:.4f}  prelog {coded_prelog(sc):.4f}")

    rank1 = np.outer([1.0, 1.0], [1.0, 1.0]) / 2.0
    for label, H in (("mimo 2x2 identity", np.eye(2)), ("mimo rank-1", rank1)):
        ch = mimo_channel(H)
        slope = fitted_slope(powers, [solve_mimo(ch, p, grid=grid).rate
                                      for p in powers])
        print(f"{label}: slope {slope:.4f}  prelog {mimo_prelog(ch):.4f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
