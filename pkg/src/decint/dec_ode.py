"""Single-step deferred-correction integrators for ODE systems.

Three closely related explicit schemes are provided, all parameterized by a
blending weight ``alpha`` in [0, 1] between the global-quadrature update
(alpha = 0) and the panel-wise sweeping update (alpha = 1):

* ``Variant.ALPHA_DEC``   - fixed node set, one correction pass per iteration;
* ``Variant.ALPHA_DEC_U`` - node count grows each early iteration, carrying
  the previous iterate over by polynomial resampling of the *states*;
* ``Variant.ALPHA_DEC_DU`` - same growth, but resampling the stored *rhs
  samples* instead, so no extra rhs evaluations are spent on resampled data.

Right-hand-side evaluations are performed lazily and cached per iteration:
a sample is computed only when some later update actually consumes it.  This
bookkeeping is what realizes the reduced per-step evaluation counts of the
growing variants, and ``StepReport.rhs_evaluations`` exposes it for tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from .coeffs import (
    DecCoefficients,
    NodeFamily,
    make_coefficients,
    make_interp_matrix,
    make_nodes,
)
from .errors import InvalidOrderError, InvalidParameterError, NumericalFailureError

__all__ = [
    "Variant",
    "OdeSystem",
    "IterationSpec",
    "SchemePlan",
    "StepReport",
    "Trajectory",
    "plan_scheme",
    "step",
    "sdec_residual_step",
    "integrate",
]


class Variant(Enum):
    ALPHA_DEC = "dec"
    ALPHA_DEC_U = "decu"
    ALPHA_DEC_DU = "decdu"


@dataclass(frozen=True)
class OdeSystem:
    """An autonomous or non-autonomous first-order system u' = rhs(t, u)."""

    dimension: int
    rhs: Callable[[float, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class IterationSpec:
    """Per-iteration data: active coefficients and, when the node set just
    grew, the resampling matrix from the previous iteration's nodes."""

    coeffs: DecCoefficients
    interp_from_prev: np.ndarray | None = None


@dataclass(frozen=True)
class SchemePlan:
    """A fully resolved scheme: variant, blending weight, order, node family,
    top subinterval count, and the per-iteration schedule."""

    variant: Variant
    alpha: float
    order: int
    node_family: NodeFamily
    subintervals: int
    euler_first_iteration: bool
    iterations: tuple[IterationSpec, ...]

    @property
    def interpolation_schedule(self) -> tuple[int, ...]:
        """1-based indices of iterations preceded by node growth."""
        return tuple(p for p, spec in enumerate(self.iterations, start=1)
                     if spec.interp_from_prev is not None)


@dataclass
class StepReport:
    """Outcome of one step.

    ``node_states`` holds the final iteration's states at all subtimenodes
    (diagnostic, not part of the stability/accuracy contract); when
    requested, ``iterate_finals`` stacks the last-node state of every
    iteration, one row per iteration.
    """

    u_next: np.ndarray
    rhs_evaluations: int
    iterations_used: int
    node_states: np.ndarray
    iterate_finals: np.ndarray | None = None


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    rhs_evaluations: int


def subintervals_for(order: int, node_family: NodeFamily) -> int:
    """Subinterval count giving order ``order`` with the fewest nodes.

    Equispaced nodes need ``order - 1`` panels; Gauss-Lobatto nodes carry
    twice the quadrature accuracy per node, so ``ceil(order / 2)`` suffice.
    """
    if node_family == NodeFamily.GAUSS_LOBATTO:
        return (order + 1) // 2
    return order - 1


def plan_scheme(variant: Variant, alpha: float, order: int,
                node_family: NodeFamily,
                euler_first_iteration: bool = True) -> SchemePlan:
    """Resolve a scheme into per-iteration coefficient data.

    ``order`` equals the iteration count; the growing variants insert a
    resampling step before iterations 2..M and then work on the full node
    set, so their last iterations coincide with the fixed-node scheme.
    """
    if not isinstance(order, (int, np.integer)) or order < 2:
        raise InvalidOrderError(f"order must be an integer >= 2, got {order!r}")
    if not (0.0 <= alpha <= 1.0):
        raise InvalidParameterError(f"alpha must lie in [0, 1], got {alpha!r}")
    order = int(order)
    top = subintervals_for(order, node_family)
    cache: dict[int, DecCoefficients] = {}

    def cf(k: int) -> DecCoefficients:
        if k not in cache:
            cache[k] = make_coefficients(make_nodes(node_family, k))
        return cache[k]

    if variant == Variant.ALPHA_DEC:
        spec = IterationSpec(cf(top))
        iterations = (spec,) * order
    elif variant in (Variant.ALPHA_DEC_U, Variant.ALPHA_DEC_DU):
        specs = [IterationSpec(cf(1))]
        for p in range(2, top + 1):
            grow = make_interp_matrix(cf(p - 1).node_set, cf(p).node_set)
            grow.setflags(write=False)
            specs.append(IterationSpec(cf(p), grow))
        specs.extend(IterationSpec(cf(top)) for _ in range(top + 1, order + 1))
        iterations = tuple(specs)
    else:
        raise InvalidParameterError(f"unknown variant {variant!r}")
    return SchemePlan(variant, float(alpha), order, node_family, top,
                      euler_first_iteration, iterations)


def _make_rhs_evaluator(sys: OdeSystem, counter: list[int]):
    dim = sys.dimension
    rhs = sys.rhs

    def eval_rhs(t: float, u: np.ndarray, iteration: int, node: int) -> np.ndarray:
        counter[0] += 1
        g = np.asarray(rhs(t, u), dtype=float)
        if g.shape != (dim,):
            raise InvalidParameterError(
                f"rhs returned shape {g.shape}, expected ({dim},)")
        if not np.all(np.isfinite(g)):
            raise NumericalFailureError(
                f"non-finite rhs at t={t!r} (iteration {iteration}, node {node})",
                t=t, iteration=iteration, node=node)
        return g

    return eval_rhs


def _fill_rhs(g: np.ndarray, valid: np.ndarray, states: np.ndarray,
              times: np.ndarray, eval_rhs, iteration: int) -> None:
    """Complete missing rhs samples at the given states, in node order."""
    for m in range(valid.size):
        if not valid[m]:
            g[m] = eval_rhs(times[m], states[m], iteration, m)
            valid[m] = True


def _correction_pass(u_n, times, dt, cf: DecCoefficients, g_star, alpha,
                     eval_rhs, g_origin, iteration):
    """One correction iteration on the node set of ``cf``.

    ``g_star`` drives the quadrature term (rhs samples of the previous
    iterate, possibly resampled).  For alpha != 0 the low-order sweep is
    evaluated on the fly, node by node; the sample at the last node is left
    unevaluated since no update in this pass consumes it.  Returns the new
    states plus the partially filled rhs cache for them.
    """
    n = cf.nodes.size
    dim = u_n.size
    states = np.empty((n, dim))
    states[0] = u_n
    quad = u_n + dt * (cf.quad_full[1:] @ g_star)
    g_new = np.empty((n, dim))
    valid = np.zeros(n, dtype=bool)
    g_new[0] = g_origin
    valid[0] = True
    if alpha == 0.0:
        states[1:] = quad
        return states, g_new, valid
    sweep_old = np.zeros(dim)
    sweep_new = np.zeros(dim)
    for m in range(1, n):
        sweep_old = sweep_old + cf.spacings[m] * g_star[m - 1]
        sweep_new = sweep_new + cf.spacings[m] * g_new[m - 1]
        states[m] = quad[m - 1] + alpha * dt * (sweep_new - sweep_old)
        if m < n - 1:
            g_new[m] = eval_rhs(times[m], states[m], iteration, m)
            valid[m] = True
    return states, g_new, valid


def _first_iteration(plan, u_n, t_n, dt, eval_rhs):
    """Run iteration 1, returning (states, g cache, validity, times, g0)."""
    cf = plan.iterations[0].coeffs
    times = cf.node_set.times(t_n, dt)
    g0 = eval_rhs(times[0], u_n, 0, 0)
    n = cf.nodes.size
    if plan.euler_first_iteration:
        states = u_n + dt * np.outer(cf.nodes, g0)
        states[0] = u_n
        g = np.empty_like(states)
        valid = np.zeros(n, dtype=bool)
        g[0] = g0
        valid[0] = True
    else:
        # a regular correction pass from the constant initial iterate
        g_star = np.empty((n, u_n.size))
        for m in range(n):
            g_star[m] = g0 if m == 0 else eval_rhs(times[m], u_n, 1, m)
        states, g, valid = _correction_pass(u_n, times, dt, cf, g_star,
                                            plan.alpha, eval_rhs, g0, 1)
    return states, g, valid, times, g0


def step(plan: SchemePlan, sys: OdeSystem, t_n: float, u_n: np.ndarray,
         dt: float, record_iterates: bool = False) -> StepReport:
    """Advance ``sys`` by one step of size ``dt`` from (t_n, u_n)."""
    if dt <= 0:
        raise InvalidParameterError(f"dt must be positive, got {dt!r}")
    u_n = np.asarray(u_n, dtype=float)
    if u_n.shape != (sys.dimension,):
        raise InvalidParameterError(
            f"state has shape {u_n.shape}, expected ({sys.dimension},)")
    counter = [0]
    eval_rhs = _make_rhs_evaluator(sys, counter)
    alpha = plan.alpha

    states, g, valid, times, g0 = _first_iteration(plan, u_n, t_n, dt, eval_rhs)
    finals = [states[-1].copy()] if record_iterates else None

    for p in range(2, plan.order + 1):
        spec = plan.iterations[p - 1]
        cf = spec.coeffs
        if plan.variant == Variant.ALPHA_DEC_DU:
            # complete the rhs cache at the previous iterate, then resample
            # the samples themselves onto the new nodes
            _fill_rhs(g, valid, states, times, eval_rhs, p - 1)
            g_star = g if spec.interp_from_prev is None else spec.interp_from_prev @ g
            times = cf.node_set.times(t_n, dt)
        else:
            if spec.interp_from_prev is not None:
                # resample the states; their rhs samples must be recomputed
                states = spec.interp_from_prev @ states
                states[0] = u_n
                times = cf.node_set.times(t_n, dt)
                g = np.empty((cf.nodes.size, u_n.size))
                valid = np.zeros(cf.nodes.size, dtype=bool)
                g[0] = g0
                valid[0] = True
            _fill_rhs(g, valid, states, times, eval_rhs, p - 1)
            g_star = g
        states, g, valid = _correction_pass(u_n, times, dt, cf, g_star,
                                            alpha, eval_rhs, g0, p)
        if record_iterates:
            finals.append(states[-1].copy())

    return StepReport(
        u_next=states[-1].copy(),
        rhs_evaluations=counter[0],
        iterations_used=plan.order,
        node_states=states,
        iterate_finals=np.array(finals) if record_iterates else None,
    )


def sdec_residual_step(coeffs: DecCoefficients, sys: OdeSystem, t_n: float,
                       u_n: np.ndarray, dt: float) -> np.ndarray:
    """One step of the sweeping scheme in its error/residual form.

    Starting from the constant initial iterate, each of the M+1 iterations
    integrates the interpolant of the cached rhs samples (the residual part)
    and sweeps an Euler-type error correction through the panels.  The
    result is identical, up to roundoff, to ``step`` with alpha = 1 and
    ``euler_first_iteration = False`` on the same node set; the routine
    exists as an independently coded cross-check of that equivalence.
    """
    if dt <= 0:
        raise InvalidParameterError(f"dt must be positive, got {dt!r}")
    u_n = np.asarray(u_n, dtype=float)
    counter = [0]
    eval_rhs = _make_rhs_evaluator(sys, counter)
    nodes = coeffs.nodes
    n = nodes.size
    times = coeffs.node_set.times(t_n, dt)
    states = np.tile(u_n, (n, 1))
    g = np.empty((n, u_n.size))
    for m in range(n):
        g[m] = eval_rhs(times[m], states[m], 0, m)
    for p in range(1, n + 1):
        # residual of the current iterate against its own rhs interpolant
        resid = u_n + dt * (coeffs.quad_full @ g) - states
        err = np.zeros_like(states)
        for m in range(1, n):
            if m == 1:
                shifted = g[0]  # corrected state at node 0 is u_n itself
            else:
                shifted = eval_rhs(times[m - 1], states[m - 1] + err[m - 1], p, m - 1)
            err[m] = (err[m - 1] + dt * coeffs.spacings[m] * (shifted - g[m - 1])
                      + resid[m] - resid[m - 1])
        states = states + err
        if p < n:
            for m in range(1, n):
                g[m] = eval_rhs(times[m], states[m], p, m)
    return states[-1].copy()


def time_grid(t0: float, t_end: float, dt: float) -> np.ndarray:
    """Uniform step times over [t0, t_end] with the last step shrunk to land
    exactly on t_end; robust to binary-inexact dt near integer divisions."""
    if t_end <= t0:
        raise InvalidParameterError("t_end must exceed t0")
    if dt <= 0:
        raise InvalidParameterError(f"dt must be positive, got {dt!r}")
    span = t_end - t0
    n_full = int(math.floor(span / dt + 1e-9))
    remainder = span - n_full * dt
    n_steps = max(n_full + (1 if remainder > 1e-12 * dt else 0), 1)
    times = np.empty(n_steps + 1)
    times[:-1] = t0 + dt * np.arange(n_steps)
    times[-1] = t_end
    return times


def integrate(plan: SchemePlan, sys: OdeSystem, t0: float, u0: np.ndarray,
              t_end: float, dt: float) -> Trajectory:
    """March from t0 to t_end in uniform steps, shrinking the last step to
    land exactly on t_end."""
    times = time_grid(t0, t_end, dt)
    n_steps = times.size - 1
    states = np.empty((n_steps + 1, sys.dimension))
    states[0] = np.asarray(u0, dtype=float)
    total_evals = 0
    for i in range(n_steps):
        try:
            report = step(plan, sys, times[i], states[i], times[i + 1] - times[i])
        except NumericalFailureError as exc:
            exc.step_index = i
            raise
        states[i + 1] = report.u_next
        total_evals += report.rhs_evaluations
    return Trajectory(times, states, total_evals)
