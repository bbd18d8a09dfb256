#!/usr/bin/env python3
"""Per-step evaluation counts and speed-up ratios, orders 2..13.

Prints one table per node family: counts for the single-sweep schemes and
both interpolation-grown variants, with the exact count ratios to three
decimals, and writes the CSV artifacts.
"""

import argparse
import os

from decint.bench import run_speedup, write_speedup_csv
from decint.coeffs import NodeFamily
from decint.problems import linear_system


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--outdir", default="results")
    ap.add_argument("--max-order", type=int, default=13)
    args = ap.parse_args()
    os.makedirs(args.outdir, exist_ok=True)
    problem = linear_system()
    orders = range(2, args.max_order + 1)
    pairs = [("sdec", "sdecdu"), ("bdec", "bdecu"), ("bdec", "bdecdu")]

    for family in NodeFamily:
        reports = {}
        for base, eff in pairs:
            rep = run_speedup(problem, base, eff, orders, family)
            reports[(base, eff)] = rep
            path = os.path.join(args.outdir,
                                f"speedup_{base}_{eff}_{family.value}.csv")
            write_speedup_csv(rep, path)
        print(f"\n{family.value}")
        print(f"{'order':>5} {'sdec':>6} {'sdecdu':>6} {'ratio':>6}   "
              f"{'bdec':>6} {'bdecu':>6} {'ratio':>6}   "
              f"{'bdecdu':>6} {'ratio':>6}")
        for i, p in enumerate(orders):
            a = reports[("sdec", "sdecdu")]
            b = reports[("bdec", "bdecu")]
            c = reports[("bdec", "bdecdu")]
            print(f"{p:>5} {a.base_evaluations[i]:>6} "
                  f"{a.efficient_evaluations[i]:>6} {a.ratios[i]:>6.3f}   "
                  f"{b.base_evaluations[i]:>6} "
                  f"{b.efficient_evaluations[i]:>6} {b.ratios[i]:>6.3f}   "
                  f"{c.efficient_evaluations[i]:>6} {c.ratios[i]:>6.3f}")


if __name__ == "__main__":
    main()
