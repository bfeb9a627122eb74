#!/usr/bin/env python3
"""Regenerate the case-study CSV tables from the bundled scenario files.

Produces, under the output directory (default ./figure_data):
    rate_curve_flat.csv    rates vs power, memoryless legacy signal
    rate_curve_ar.csv      rates vs power, AR(1) legacy signal
    prelog_mesh_flat.csv   prelog over the (D/sigma2_s, SNR) mesh, flat
    prelog_mesh_ar.csv     same mesh with AR(1) correlation
    rate_curve_coded_a.csv coded legacy, undecodable cross-link
    rate_curve_coded_b.csv coded legacy, decodable cross-link

Usage: python3 scripts/make_figure_data.py [-o DIR] [--grid N]
"""

import argparse
import sys
from pathlib import Path

from specshape import cli

SCENARIOS = Path(__file__).parent / "scenarios"
JOBS = [
    ("rate-curve", "flat_rate_curve.json", "rate_curve_flat.csv"),
    ("rate-curve", "ar_rate_curve.json", "rate_curve_ar.csv"),
    ("prelog-mesh", "flat_prelog_mesh.json", "prelog_mesh_flat.csv"),
    ("prelog-mesh", "ar_prelog_mesh.json", "prelog_mesh_ar.csv"),
    ("rate-curve", "coded_case_a_curve.json", "rate_curve_coded_a.csv"),
    ("rate-curve", "coded_case_b_curve.json", "rate_curve_coded_b.csv"),
]


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("-o", "--output-dir", default="figure_data")
    ap.add_argument("--grid", type=int, default=4096)
    args = ap.parse_args()
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    for command, scenario, target in JOBS:
        code = cli.main([command, str(SCENARIOS / scenario),
                         "-o", str(out / target), "--grid", str(args.grid)])
        if code != 0:
            print(f"{scenario} failed with exit code {code}", file=sys.stderr)
            return code
        print(f"{target} done")
    return 0


if __name__ == "__main__":
    sys.exit(main())
