"""Benchmark harness: convergence sweeps, evaluation-count speed-up tables,
and exact CSV round-trips for both.

Error columns use the Euclidean norm of the final-time defect against the
problem's closed-form solution.  Wall-clock seconds are carried as an
informational column only; nothing downstream asserts on them (evaluation
counts are the machine-independent cost measure).
"""

from __future__ import annotations

import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dec_ode import SchemePlan, Variant, integrate, plan_scheme, step
from .coeffs import NodeFamily
from .errors import InvalidParameterError, NumericalFailureError
from .problems import TestProblem

_TOKEN_RE = re.compile(r"^([bs])dec(u|du)?(\d+)$")
_FAMILY_RE = re.compile(r"^([bs])dec(u|du)?$")
_VARIANTS = {None: Variant.ALPHA_DEC, "u": Variant.ALPHA_DEC_U,
             "du": Variant.ALPHA_DEC_DU}


def parse_scheme_token(token: str) -> SchemePlanSpec:
    """Parse a compact scheme name such as ``bdec5`` or ``sdecdu11``.

    The leading letter selects the low/high end of the alpha family
    (``b`` = 0, ``s`` = 1), the optional ``u``/``du`` suffix selects the
    node-growth variant, and the trailing integer is the order.
    """
    m = _TOKEN_RE.match(token)
    if m is None:
        raise InvalidParameterError(
            f"unrecognized scheme token {token!r}; expected e.g. bdec5, "
            "sdecu4, bdecdu7")
    return SchemePlanSpec(variant=_VARIANTS[m.group(2)],
                          alpha=0.0 if m.group(1) == "b" else 1.0,
                          order=int(m.group(3)))


def parse_scheme_family(token: str) -> tuple[Variant, float]:
    """Parse an order-free scheme name such as ``bdec`` or ``sdecdu``."""
    m = _FAMILY_RE.match(token)
    if m is None:
        raise InvalidParameterError(
            f"unrecognized scheme family {token!r}; expected e.g. bdec, "
            "sdecu, bdecdu")
    return _VARIANTS[m.group(2)], 0.0 if m.group(1) == "b" else 1.0


@dataclass(frozen=True)
class SchemePlanSpec:
    variant: Variant
    alpha: float
    order: int

    @property
    def token(self) -> str:
        prefix = "b" if self.alpha == 0.0 else "s"
        suffix = {Variant.ALPHA_DEC: "", Variant.ALPHA_DEC_U: "u",
                  Variant.ALPHA_DEC_DU: "du"}[self.variant]
        return f"{prefix}dec{suffix}{self.order}"

    def plan(self, node_family: NodeFamily) -> SchemePlan:
        return plan_scheme(self.variant, self.alpha, self.order, node_family)


@dataclass(frozen=True)
class ConvergenceSeries:
    """Error-versus-step data for one scheme, steps sorted decreasing.

    ``errors[i] is None`` marks a cell whose integration blew up; such cells
    are skipped by the slope fits.  ``pair_slopes`` holds the log2-log2
    slope between each adjacent pair of valid rows and ``ls_slope`` the
    least-squares slope over all valid rows (None when fewer than two).
    """
    scheme: str
    steps: tuple[float, ...]
    errors: tuple[float | None, ...]
    rhs_evaluations: tuple[int, ...]
    seconds: tuple[float, ...]

    def __post_init__(self):
        if any(self.steps[i] <= self.steps[i + 1]
               for i in range(len(self.steps) - 1)):
            raise InvalidParameterError("steps must be strictly decreasing")

    @property
    def pair_slopes(self) -> tuple[float | None, ...]:
        out = []
        for i in range(len(self.steps) - 1):
            e0, e1 = self.errors[i], self.errors[i + 1]
            if e0 is None or e1 is None or e0 <= 0.0 or e1 <= 0.0:
                out.append(None)
            else:
                out.append((np.log2(e0) - np.log2(e1))
                           / (np.log2(self.steps[i]) - np.log2(self.steps[i + 1])))
        return tuple(out)

    @property
    def ls_slope(self) -> float | None:
        pts = [(np.log2(s), np.log2(e))
               for s, e in zip(self.steps, self.errors)
               if e is not None and e > 0.0]
        if len(pts) < 2:
            return None
        x, y = np.array(pts).T
        return float(np.polyfit(x, y, 1)[0])


@dataclass(frozen=True)
class ConvergenceReport:
    problem: str
    series: tuple[ConvergenceSeries, ...]


def _one_cell(problem: TestProblem, spec: SchemePlanSpec,
              node_family: NodeFamily, dt: float):
    plan = spec.plan(node_family)
    t0 = time.perf_counter()
    try:
        # divergence is recorded as a missing cell, so silence the overflow
        # chatter that precedes the non-finite check (errstate is
        # thread-local, hence set here rather than by callers)
        with np.errstate(over="ignore", invalid="ignore"):
            traj = integrate(plan, problem.system, problem.t0, problem.u0,
                             problem.t_end, dt)
    except NumericalFailureError:
        return None, 0, time.perf_counter() - t0
    err = float(np.linalg.norm(traj.states[-1] - problem.exact(problem.t_end)))
    return err, traj.rhs_evaluations, time.perf_counter() - t0


def run_convergence(problem: TestProblem, schemes, dts,
                    node_family: NodeFamily = NodeFamily.EQUISPACED,
                    ) -> ConvergenceReport:
    """Sweep every scheme over every step size; cells run concurrently.

    ``schemes`` may mix token strings and :class:`SchemePlanSpec`.  Step
    sizes are sorted into decreasing order and deduplicated.  A cell whose
    integration diverges is recorded with a missing error instead of
    aborting the sweep.
    """
    specs = [parse_scheme_token(s) if isinstance(s, str) else s
             for s in schemes]
    if not specs:
        raise InvalidParameterError("need at least one scheme")
    steps = tuple(sorted({float(dt) for dt in dts}, reverse=True))
    if not steps or steps[-1] <= 0.0:
        raise InvalidParameterError("step sizes must be positive")
    cells = [(spec, dt) for spec in specs for dt in steps]
    with ThreadPoolExecutor(max_workers=min(8, len(cells))) as pool:
        results = list(pool.map(
            lambda cell: _one_cell(problem, cell[0], node_family, cell[1]),
            cells))
    series = []
    for i, spec in enumerate(specs):
        chunk = results[i * len(steps):(i + 1) * len(steps)]
        series.append(ConvergenceSeries(
            scheme=spec.token,
            steps=steps,
            errors=tuple(r[0] for r in chunk),
            rhs_evaluations=tuple(r[1] for r in chunk),
            seconds=tuple(r[2] for r in chunk)))
    return ConvergenceReport(problem=problem.name, series=tuple(series))


# ---------------------------------------------------------------------------
# speed-up tables


@dataclass(frozen=True)
class SpeedupReport:
    """Per-step rhs-evaluation counts of a baseline scheme against an
    interpolation-accelerated one, and their exact ratio."""
    problem: str
    base: str
    efficient: str
    node_family: NodeFamily
    orders: tuple[int, ...]
    base_evaluations: tuple[int, ...]
    efficient_evaluations: tuple[int, ...]

    @property
    def ratios(self) -> tuple[float, ...]:
        return tuple(b / e for b, e in zip(self.base_evaluations,
                                           self.efficient_evaluations))


def _evals_per_step(problem: TestProblem, variant: Variant, alpha: float,
                    order: int, node_family: NodeFamily) -> int:
    plan = plan_scheme(variant, alpha, order, node_family)
    dt = (problem.t_end - problem.t0) / 16.0
    return step(plan, problem.system, problem.t0, problem.u0,
                dt).rhs_evaluations


def run_speedup(problem: TestProblem, base: str, efficient: str, orders,
                node_family: NodeFamily = NodeFamily.EQUISPACED,
                ) -> SpeedupReport:
    """Measure per-step evaluation counts of two scheme families at the
    same orders on the same node family; the ratio is an exact rational."""
    bvar, balpha = parse_scheme_family(base)
    evar, ealpha = parse_scheme_family(efficient)
    orders = tuple(int(p) for p in orders)
    if not orders:
        raise InvalidParameterError("need at least one order")
    base_counts = tuple(_evals_per_step(problem, bvar, balpha, p, node_family)
                        for p in orders)
    eff_counts = tuple(_evals_per_step(problem, evar, ealpha, p, node_family)
                       for p in orders)
    return SpeedupReport(problem=problem.name, base=base,
                         efficient=efficient, node_family=node_family,
                         orders=orders, base_evaluations=base_counts,
                         efficient_evaluations=eff_counts)


# ---------------------------------------------------------------------------
# CSV round-trips

# Floats are written with repr, which round-trips float64 exactly; empty
# fields encode None (failed cells).


def _fmt(x) -> str:
    return "" if x is None else repr(float(x))


def _parse_opt(text: str) -> float | None:
    return None if text == "" else float(text)


def write_convergence_csv(report: ConvergenceReport, path) -> None:
    lines = [f"# problem={report.problem}",
             "scheme,dt,error,rhs_evaluations,seconds"]
    for s in report.series:
        for dt, err, ev, sec in zip(s.steps, s.errors, s.rhs_evaluations,
                                    s.seconds):
            lines.append(f"{s.scheme},{_fmt(dt)},{_fmt(err)},{ev},{_fmt(sec)}")
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def read_convergence_csv(path) -> ConvergenceReport:
    with open(path, encoding="ascii") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    if not lines or not lines[0].startswith("# problem="):
        raise InvalidParameterError(f"{path}: missing problem header")
    problem = lines[0].split("=", 1)[1]
    if lines[1] != "scheme,dt,error,rhs_evaluations,seconds":
        raise InvalidParameterError(f"{path}: unexpected column header")
    rows: dict[str, list] = {}
    for ln in lines[2:]:
        scheme, dt, err, ev, sec = ln.split(",")
        rows.setdefault(scheme, []).append(
            (float(dt), _parse_opt(err), int(ev), float(sec)))
    series = tuple(
        ConvergenceSeries(scheme=scheme,
                          steps=tuple(r[0] for r in data),
                          errors=tuple(r[1] for r in data),
                          rhs_evaluations=tuple(r[2] for r in data),
                          seconds=tuple(r[3] for r in data))
        for scheme, data in rows.items())
    return ConvergenceReport(problem=problem, series=series)


def write_speedup_csv(report: SpeedupReport, path) -> None:
    lines = [f"# problem={report.problem}",
             f"# base={report.base}",
             f"# efficient={report.efficient}",
             f"# nodes={report.node_family.value}",
             "order,base_evaluations,efficient_evaluations,ratio"]
    for p, b, e, r in zip(report.orders, report.base_evaluations,
                          report.efficient_evaluations, report.ratios):
        lines.append(f"{p},{b},{e},{_fmt(r)}")
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def read_speedup_csv(path) -> SpeedupReport:
    with open(path, encoding="ascii") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    meta = {}
    body = []
    for ln in lines:
        if ln.startswith("# "):
            key, value = ln[2:].split("=", 1)
            meta[key] = value
        elif ln != "order,base_evaluations,efficient_evaluations,ratio":
            body.append(ln.split(","))
    return SpeedupReport(problem=meta["problem"], base=meta["base"],
                         efficient=meta["efficient"],
                         node_family=NodeFamily(meta["nodes"]),
                         orders=tuple(int(r[0]) for r in body),
                         base_evaluations=tuple(int(r[1]) for r in body),
                         efficient_evaluations=tuple(int(r[2]) for r in body))
