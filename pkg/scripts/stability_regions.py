#!/usr/bin/env python3
"""Linear stability regions for the zero-alpha schemes, orders 3..8.

Exports a (re, im, |R|) CSV and a PGM mask per order (white = |R| <= 1,
x right = Re, y up = Im) and prints the negative real-axis limits.  The
zero-alpha stability polynomial is the exponential series truncated at the
order, independent of variant and node distribution, so one run per order
covers the whole family.
"""

import argparse
import os

from decint.coeffs import NodeFamily
from decint.dec_ode import Variant, plan_scheme
from decint.rk_export import build_tableau
from decint.stability import (
    real_axis_limit,
    region_grid,
    stability_polynomial,
    write_region_csv,
    write_region_pgm,
)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--outdir", default="results")
    ap.add_argument("--orders", default="3,4,5,6,7,8")
    ap.add_argument("--resolution", type=int, default=400)
    args = ap.parse_args()
    os.makedirs(args.outdir, exist_ok=True)

    print(f"{'order':>5} {'degree':>6} {'real-axis limit':>16}")
    for order in (int(p) for p in args.orders.split(",")):
        plan = plan_scheme(Variant.ALPHA_DEC, 0.0, order,
                           NodeFamily.EQUISPACED)
        poly = stability_polynomial(build_tableau(plan))
        limit = real_axis_limit(poly)
        grid = region_grid(poly, (-12.0, 4.0), (-8.0, 8.0),
                           args.resolution, args.resolution)
        prefix = os.path.join(args.outdir, f"stability_order{order}")
        write_region_csv(grid, prefix + ".csv")
        write_region_pgm(grid, prefix + ".pgm")
        print(f"{order:>5} {poly.degree:>6} {limit:>16.6f}   -> {prefix}.*")


if __name__ == "__main__":
    main()
