"""Command-line front end.

Subcommands: solve, convergence, speedup, tableau, stability, pde1d.
Exit codes: 0 success, 1 usage error, 2 numerical failure during a run.
Each subcommand accepts ``--config file.toml`` whose keys mirror its flags
(dashes become underscores); flags given on the command line win over the
file.  ``--out`` writes the machine-readable artifact (CSV, or JSON for
``tableau``); ``--json`` prints a JSON mirror of the result to stdout
instead of the human-readable text.  Everything is deterministic; there is
no RNG to seed.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import bench
from .adaptive import AdaptiveConfig, adaptive_integrate
from .cg1d import Basis, BasisKind, STEPPERS, build_space, run_advection
from .coeffs import NodeFamily
from .dec_ode import Variant, integrate
from .errors import (
    InvalidOrderError,
    InvalidParameterError,
    LumpingError,
    NumericalFailureError,
    UnsupportedExportError,
)
from .problems import PROBLEMS
from .rk_export import build_tableau, tableau_json
from .stability import (
    real_axis_limit,
    region_grid,
    stability_polynomial,
    write_region_csv,
    write_region_pgm,
)

NODE_TOKENS = {"eq": NodeFamily.EQUISPACED, "gl": NodeFamily.GAUSS_LOBATTO}
VARIANT_TOKENS = {v.value: v for v in Variant}
BASIS_TOKENS = {
    "b2": (BasisKind.BERNSTEIN, 2), "b3": (BasisKind.BERNSTEIN, 3),
    "b4": (BasisKind.BERNSTEIN, 4),
    "p2": (BasisKind.LAGRANGE, 2), "p3": (BasisKind.LAGRANGE, 3),
    "p4": (BasisKind.LAGRANGE, 4),
    "pgl2": (BasisKind.LAGRANGE_GL, 2), "pgl3": (BasisKind.LAGRANGE_GL, 3),
    "pgl4": (BasisKind.LAGRANGE_GL, 4),
}
# default interior-penalty coefficients per basis, tuned for CFL 0.1
DEFAULT_CIP = {
    "b2": 0.016, "p2": 0.00242, "pgl2": 0.00346,
    "b3": 0.00702, "p3": 0.00702, "pgl3": 0.000113,
    "pgl4": 0.000113,
}


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on usage errors; this tool reserves 2
    for numerical failures, so remap to 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _csv_list(text: str) -> list[str]:
    return [tok.strip() for tok in text.split(",") if tok.strip()]


def _fmt(x) -> str:
    return repr(float(x))


def _write_lines(path, lines) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def _emit(args, human_lines, payload) -> None:
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        for line in human_lines:
            print(line)


# ---------------------------------------------------------------------------
# subcommand handlers


def _cmd_solve(args) -> int:
    problem = PROBLEMS[args.problem]()
    spec = bench.parse_scheme_token(args.scheme)
    alpha = spec.alpha if args.alpha is None else args.alpha
    nodes = NODE_TOKENS[args.nodes]
    dt = args.dt if args.dt is not None else (problem.t_end - problem.t0) / 100
    payload = {"problem": problem.name, "scheme": args.scheme,
               "alpha": alpha, "nodes": nodes.value, "dt": dt,
               "t_end": problem.t_end, "adaptive": bool(args.adaptive)}
    if args.adaptive:
        cfg = AdaptiveConfig(variant=spec.variant, alpha=alpha,
                             epsilon=args.eps, p_max=args.p_max,
                             node_family=nodes)
        run = adaptive_integrate(cfg, problem.system, problem.t0,
                                 problem.u0, problem.t_end, dt)
        traj = run.trajectory
        payload.update(epsilon=args.eps, p_max=args.p_max,
                       mean_p=run.mean_p, std_p=run.std_p,
                       p_used=[int(p) for p in run.p_used],
                       all_converged=bool(run.all_converged))
    else:
        from .dec_ode import plan_scheme

        plan = plan_scheme(spec.variant, alpha, spec.order, nodes)
        traj = integrate(plan, problem.system, problem.t0, problem.u0,
                         problem.t_end, dt)
    err = float(np.linalg.norm(traj.states[-1] - problem.exact(problem.t_end)))
    payload.update(final_state=[float(v) for v in traj.states[-1]],
                   error=err, rhs_evaluations=traj.rhs_evaluations)
    lines = [f"problem={problem.name} scheme={args.scheme} nodes={args.nodes} "
             f"dt={dt:g}",
             f"final state: {np.array2string(traj.states[-1], precision=12)}",
             f"error vs exact: {err:.6e}",
             f"rhs evaluations: {traj.rhs_evaluations}"]
    if args.adaptive:
        lines.append(f"mean p: {payload['mean_p']:.4f}  "
                     f"std p: {payload['std_p']:.4f}  "
                     f"converged: {payload['all_converged']}")
    _emit(args, lines, payload)
    if args.out:
        dim = traj.states.shape[1]
        header = "t," + ",".join(f"u{i}" for i in range(dim))
        rows = [header]
        for t, u in zip(traj.times, traj.states):
            rows.append(",".join([_fmt(t)] + [_fmt(v) for v in u]))
        _write_lines(args.out, rows)
    return 0


def _cmd_convergence(args) -> int:
    problem = PROBLEMS[args.problem]()
    if args.dts:
        dts = [float(tok) for tok in _csv_list(args.dts)]
    else:
        span = problem.t_end - problem.t0
        dts = [span / 2**k for k in range(args.k_min, args.k_max + 1)]
    report = bench.run_convergence(problem, _csv_list(args.schemes), dts,
                                   NODE_TOKENS[args.nodes])
    lines = [f"problem={report.problem} nodes={args.nodes}"]
    payload = {"problem": report.problem, "nodes": args.nodes, "series": []}
    for s in report.series:
        lines.append(f"scheme {s.scheme}:")
        slopes = s.pair_slopes
        for i, (dt, err, ev) in enumerate(zip(s.steps, s.errors,
                                              s.rhs_evaluations)):
            etxt = "failed" if err is None else f"{err:.6e}"
            stxt = "" if i == 0 or slopes[i - 1] is None else \
                f"  slope {slopes[i - 1]:.3f}"
            lines.append(f"  dt={dt:<12g} error={etxt}  evals={ev}{stxt}")
        ls = s.ls_slope
        lines.append(f"  least-squares slope: "
                     f"{'n/a' if ls is None else format(ls, '.4f')}")
        payload["series"].append({
            "scheme": s.scheme, "steps": list(s.steps),
            "errors": list(s.errors),
            "rhs_evaluations": list(s.rhs_evaluations),
            "pair_slopes": list(slopes), "ls_slope": ls})
    _emit(args, lines, payload)
    if args.out:
        bench.write_convergence_csv(report, args.out)
    return 0


def _cmd_speedup(args) -> int:
    problem = PROBLEMS[args.problem]()
    orders = [int(tok) for tok in _csv_list(args.orders)]
    report = bench.run_speedup(problem, args.base, args.efficient, orders,
                               NODE_TOKENS[args.nodes])
    lines = [f"problem={report.problem} nodes={args.nodes} "
             f"base={args.base} efficient={args.efficient}",
             "order  base  efficient  speedup"]
    for p, b, e, r in zip(report.orders, report.base_evaluations,
                          report.efficient_evaluations, report.ratios):
        lines.append(f"{p:>5}  {b:>4}  {e:>9}  {r:.3f}")
    payload = {"problem": report.problem, "nodes": args.nodes,
               "base": args.base, "efficient": args.efficient,
               "orders": list(report.orders),
               "base_evaluations": list(report.base_evaluations),
               "efficient_evaluations": list(report.efficient_evaluations),
               "ratios": list(report.ratios)}
    _emit(args, lines, payload)
    if args.out:
        bench.write_speedup_csv(report, args.out)
    return 0


def _cmd_tableau(args) -> int:
    from .dec_ode import plan_scheme

    plan = plan_scheme(VARIANT_TOKENS[args.variant], args.alpha, args.order,
                       NODE_TOKENS[args.nodes])
    tab = build_tableau(plan)
    text = tableau_json(plan, tab)
    if args.json:
        print(text)
    else:
        print(f"variant={args.variant} alpha={args.alpha:g} "
              f"order={tab.order} nodes={args.nodes} stages={tab.S}")
        print("c =", np.array2string(tab.c, precision=6))
        print("b =", np.array2string(tab.b, precision=6))
    if args.out:
        with open(args.out, "w", encoding="ascii") as fh:
            fh.write(text + "\n")
    return 0


def _cmd_stability(args) -> int:
    from .dec_ode import plan_scheme

    plan = plan_scheme(VARIANT_TOKENS[args.variant], args.alpha, args.order,
                       NODE_TOKENS[args.nodes])
    poly = stability_polynomial(build_tableau(plan))
    limit = real_axis_limit(poly)
    parts = [float(v) for v in args.grid.split(",")] if args.grid else \
        [-12.0, 2.0, -12.0, 12.0, 600, 600]
    if len(parts) != 6:
        raise InvalidParameterError(
            "--grid wants re0,re1,im0,im1,nx,ny (6 values)")
    lines = [f"variant={args.variant} alpha={args.alpha:g} "
             f"order={args.order} nodes={args.nodes}",
             f"polynomial degree: {poly.degree}",
             f"real-axis stability limit: {limit:.6f}"]
    payload = {"variant": args.variant, "alpha": args.alpha,
               "order": args.order, "nodes": args.nodes,
               "degree": poly.degree,
               "coefficients": [float(c) for c in poly.coefficients],
               "real_axis_limit": limit}
    _emit(args, lines, payload)
    if args.out:
        grid = region_grid(poly, (parts[0], parts[1]), (parts[2], parts[3]),
                           int(parts[4]), int(parts[5]))
        write_region_csv(grid, args.out + ".csv")
        write_region_pgm(grid, args.out + ".pgm")
        if not args.json:
            print(f"wrote {args.out}.csv and {args.out}.pgm")
    return 0


def _cmd_pde1d(args) -> int:
    kind, degree = BASIS_TOKENS[args.basis]
    basis = Basis(kind, degree)
    order = args.order if args.order is not None else degree + 1
    if args.cip is not None:
        delta = args.cip
    elif args.basis in DEFAULT_CIP:
        delta = DEFAULT_CIP[args.basis]
    else:
        raise InvalidParameterError(
            f"no default penalty coefficient for basis {args.basis!r}; "
            "pass --cip")
    counts = [int(tok) for tok in _csv_list(args.elements)]
    rows = []
    for n in counts:
        res = run_advection(build_space(n, basis), args.scheme, order, delta,
                            cfl=args.cfl, t_end=args.t_end)
        rows.append((n, res.space.h, *res.errors, res.residual_evaluations))
    lines = [f"basis={args.basis} scheme={args.scheme} order={order} "
             f"cip={delta:g} cfl={args.cfl:g} t_end={args.t_end:g}",
             "N      h            L1           L2           Linf         evals"]
    for n, h, l1, l2, linf, ev in rows:
        lines.append(f"{n:<6} {h:<12.6g} {l1:<12.6e} {l2:<12.6e} "
                     f"{linf:<12.6e} {ev}")
    if len(rows) >= 2:
        l2s = np.array([r[3] for r in rows])
        hs = np.array([r[1] for r in rows])
        ls = float(np.polyfit(np.log2(hs), np.log2(l2s), 1)[0])
        lines.append(f"least-squares L2 slope: {ls:.4f}")
    else:
        ls = None
    payload = {"basis": args.basis, "scheme": args.scheme, "order": order,
               "cip": delta, "cfl": args.cfl, "t_end": args.t_end,
               "rows": [{"elements": n, "h": h, "L1": l1, "L2": l2,
                         "Linf": linf, "residual_evaluations": ev}
                        for n, h, l1, l2, linf, ev in rows],
               "ls_slope_l2": ls}
    _emit(args, lines, payload)
    if args.out:
        csv = ["elements,h,L1_error,L2_error,Linf_error,residual_evaluations"]
        for n, h, l1, l2, linf, ev in rows:
            csv.append(f"{n},{_fmt(h)},{_fmt(l1)},{_fmt(l2)},{_fmt(linf)},{ev}")
        _write_lines(args.out, csv)
    return 0


# ---------------------------------------------------------------------------
# parser assembly


def _add_common(sp) -> None:
    sp.add_argument("--out", help="write the machine-readable artifact here")
    sp.add_argument("--json", action="store_true",
                    help="print a JSON mirror instead of text")
    sp.add_argument("--config", help="TOML file of defaults for this "
                    "subcommand; explicit flags override it")


def build_parser() -> tuple[_Parser, dict[str, _Parser]]:
    parser = _Parser(prog="decint",
                     description="Deferred-correction time integrators: "
                     "solvers, tableau export, stability regions, and a 1D "
                     "advection benchmark.")
    subs = parser.add_subparsers(dest="command", required=True)
    sub_map: dict[str, _Parser] = {}

    def sub(name, func, **kw):
        sp = subs.add_parser(name, **kw)
        sp.set_defaults(func=func)
        sub_map[name] = sp
        return sp

    sp = sub("solve", _cmd_solve, help="integrate a test problem")
    sp.add_argument("--problem", choices=sorted(PROBLEMS), default="linear")
    sp.add_argument("--scheme", default="bdec3",
                    help="token like bdec5, sdecu4, bdecdu7")
    sp.add_argument("--alpha", type=float, default=None,
                    help="override the token's blend parameter")
    sp.add_argument("--nodes", choices=sorted(NODE_TOKENS), default="eq")
    sp.add_argument("--dt", type=float, default=None)
    sp.add_argument("--adaptive", action="store_true",
                    help="pick the iteration count per step")
    sp.add_argument("--eps", type=float, default=1e-8)
    sp.add_argument("--p-max", type=int, default=15)
    _add_common(sp)

    sp = sub("convergence", _cmd_convergence,
             help="error-versus-dt sweep with fitted slopes")
    sp.add_argument("--problem", choices=sorted(PROBLEMS), default="linear")
    sp.add_argument("--schemes", default="bdec3,bdec5",
                    help="comma-separated scheme tokens")
    sp.add_argument("--nodes", choices=sorted(NODE_TOKENS), default="eq")
    sp.add_argument("--k-min", type=int, default=3,
                    help="smallest k in dt = span/2^k")
    sp.add_argument("--k-max", type=int, default=9)
    sp.add_argument("--dts", default=None,
                    help="explicit comma-separated dt list (overrides k range)")
    _add_common(sp)

    sp = sub("speedup", _cmd_speedup,
             help="per-step evaluation-count ratios between two families")
    sp.add_argument("--problem", choices=sorted(PROBLEMS), default="linear")
    sp.add_argument("--base", default="bdec")
    sp.add_argument("--efficient", default="bdecdu")
    sp.add_argument("--orders", default=",".join(str(p) for p in range(2, 14)))
    sp.add_argument("--nodes", choices=sorted(NODE_TOKENS), default="eq")
    _add_common(sp)

    sp = sub("tableau", _cmd_tableau, help="export a Runge-Kutta tableau")
    sp.add_argument("--variant", choices=sorted(VARIANT_TOKENS), default="dec")
    sp.add_argument("--alpha", type=float, default=0.0)
    sp.add_argument("--order", type=int, default=3)
    sp.add_argument("--nodes", choices=sorted(NODE_TOKENS), default="eq")
    _add_common(sp)

    sp = sub("stability", _cmd_stability,
             help="stability polynomial, real-axis limit, region exports")
    sp.add_argument("--variant", choices=sorted(VARIANT_TOKENS), default="dec")
    sp.add_argument("--alpha", type=float, default=0.0)
    sp.add_argument("--order", type=int, default=3)
    sp.add_argument("--nodes", choices=sorted(NODE_TOKENS), default="eq")
    sp.add_argument("--grid", default=None,
                    help="re0,re1,im0,im1,nx,ny for the region scan; use "
                    "--grid=-12,2,... so the leading minus is not read as "
                    "a flag")
    _add_common(sp)

    sp = sub("pde1d", _cmd_pde1d,
             help="1D periodic advection convergence benchmark")
    sp.add_argument("--basis", choices=sorted(BASIS_TOKENS), default="b2")
    sp.add_argument("--elements", default="16,32,64,128",
                    help="comma-separated element counts")
    sp.add_argument("--cfl", type=float, default=0.1)
    sp.add_argument("--cip", type=float, default=None,
                    help="jump-penalty coefficient (defaults per basis)")
    sp.add_argument("--scheme", choices=sorted(STEPPERS), default="bdec")
    sp.add_argument("--order", type=int, default=None,
                    help="time order (defaults to degree + 1)")
    sp.add_argument("--t-end", type=float, default=1.0)
    _add_common(sp)

    return parser, sub_map


def _apply_config(parser: _Parser, sub_map: dict[str, _Parser],
                  argv, args) -> argparse.Namespace:
    with open(args.config, "rb") as fh:
        cfg = tomllib.load(fh)
    sp = sub_map[args.command]
    dests = {a.dest for a in sp._actions} - {"help", "config", "func"}
    unknown = set(cfg) - dests
    if unknown:
        sp.error(f"unknown config keys: {', '.join(sorted(unknown))}")
    sp.set_defaults(**cfg)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, sub_map = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.config:
            args = _apply_config(parser, sub_map, argv, args)
        # a diverging run is reported once via the exception, so the
        # intermediate overflow warnings are pure noise here
        with np.errstate(over="ignore", invalid="ignore"):
            return args.func(args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    except NumericalFailureError as exc:
        print(f"decint: numerical failure: {exc}", file=sys.stderr)
        return 2
    except (InvalidOrderError, InvalidParameterError, UnsupportedExportError,
            LumpingError, FileNotFoundError, tomllib.TOMLDecodeError) as exc:
        print(f"decint: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
