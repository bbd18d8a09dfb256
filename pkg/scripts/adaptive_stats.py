#!/usr/bin/env python3
"""Iteration-count statistics for the p-adaptive stepper.

For each tolerance, runs the linear problem over a range of step sizes and
prints the final error, mean/std of the per-step iteration count, and the
evaluation total.  The error plateaus at the tolerance level while the
iteration count falls as dt shrinks.
"""

import argparse

import numpy as np

from decint.adaptive import AdaptiveConfig, adaptive_integrate
from decint.coeffs import NodeFamily
from decint.dec_ode import Variant
from decint.problems import PROBLEMS


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--problem", choices=sorted(PROBLEMS), default="linear")
    ap.add_argument("--variant", choices=("decu", "decdu"), default="decu")
    ap.add_argument("--epsilons", default="1e-4,1e-8,1e-12")
    args = ap.parse_args()
    problem = PROBLEMS[args.problem]()
    variant = (Variant.ALPHA_DEC_U if args.variant == "decu"
               else Variant.ALPHA_DEC_DU)
    span = problem.t_end - problem.t0
    exact = problem.exact(problem.t_end)

    for eps in (float(e) for e in args.epsilons.split(",")):
        cfg = AdaptiveConfig(variant=variant, alpha=0.0, epsilon=eps,
                             node_family=NodeFamily.EQUISPACED)
        print(f"\nepsilon = {eps:g}  ({args.problem}, {args.variant})")
        print(f"{'dt':>12} {'error':>12} {'mean p':>8} {'std p':>7} "
              f"{'evals':>7} {'converged':>9}")
        for k in range(3, 10):
            dt = span / 2**k
            run = adaptive_integrate(cfg, problem.system, problem.t0,
                                     problem.u0, problem.t_end, dt)
            err = float(np.linalg.norm(run.trajectory.states[-1] - exact))
            print(f"{dt:>12.6g} {err:>12.3e} {run.mean_p:>8.3f} "
                  f"{run.std_p:>7.3f} {run.trajectory.rhs_evaluations:>7} "
                  f"{str(run.all_converged):>9}")


if __name__ == "__main__":
    main()
