"""Materialize a scheme plan as an explicit Runge-Kutta Butcher tableau.

Every state the stepper computes has the form u_n + dt * (linear combination
of rhs samples).  The builder reruns the stepper's control flow symbolically,
tracking those combination coefficients instead of numbers: each rhs
evaluation registers a stage whose A-row is the coefficient vector of the
state being sampled, and the output state's coefficients become b.  Stages
therefore appear in evaluation order, A is strictly lower triangular by
construction, and one RK step reproduces the iterative stepper to roundoff.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .coeffs import DecCoefficients, NodeFamily
from .dec_ode import OdeSystem, SchemePlan, Variant, subintervals_for
from .errors import UnsupportedExportError

__all__ = [
    "ButcherTableau",
    "build_tableau",
    "stage_count",
    "rk_step",
    "tableau_json",
]


@dataclass(frozen=True)
class ButcherTableau:
    A: np.ndarray
    b: np.ndarray
    c: np.ndarray
    S: int
    order: int
    # iteration index at which each stage was registered; A[i, j] != 0 only
    # for blocks[j] <= blocks[i], with strict inequality when alpha = 0
    stage_blocks: tuple[int, ...] = field(default=(), compare=False)


class _StageRecorder:
    """Registry of stages in evaluation order."""

    def __init__(self):
        self.c: list[float] = []
        self.rows: list[np.ndarray] = []
        self.blocks: list[int] = []

    @property
    def count(self) -> int:
        return len(self.c)

    def register(self, c_frac: float, state: np.ndarray, block: int) -> np.ndarray:
        self.c.append(float(c_frac))
        self.rows.append(np.asarray(state, dtype=float).copy())
        self.blocks.append(block)
        unit = np.zeros(self.count)
        unit[-1] = 1.0
        return unit


def _pad(vec: np.ndarray, width: int) -> np.ndarray:
    out = np.zeros(width)
    out[: vec.size] = vec
    return out


def _stack(vectors, width: int) -> np.ndarray:
    return np.array([_pad(v, width) for v in vectors])


def _sym_fill(rec: _StageRecorder, g: list, states: list, nodes: np.ndarray,
              block: int) -> None:
    for m in range(len(g)):
        if g[m] is None:
            g[m] = rec.register(nodes[m], states[m], block)


def _sym_pass(rec: _StageRecorder, cf: DecCoefficients, g_star: list,
              alpha: float, g0: np.ndarray, block: int):
    n = cf.nodes.size
    width = rec.count
    gs = _stack(g_star, width)
    quad = cf.quad_full[1:] @ gs
    states: list[np.ndarray] = [np.zeros(0)]
    g_new: list = [g0]
    if alpha == 0.0:
        states.extend(quad[m - 1] for m in range(1, n))
        g_new.extend([None] * (n - 1))
        return states, g_new
    sweep_old = np.zeros(width)
    sweep_new = np.zeros(0)
    for m in range(1, n):
        sweep_old = sweep_old + cf.spacings[m] * gs[m - 1]
        w = rec.count
        sweep_new = _pad(sweep_new, w) + cf.spacings[m] * _pad(g_new[m - 1], w)
        state_m = (_pad(quad[m - 1], w)
                   + alpha * (sweep_new - _pad(sweep_old, w)))
        states.append(state_m)
        g_new.append(rec.register(cf.nodes[m], state_m, block)
                     if m < n - 1 else None)
    return states, g_new


def build_tableau(plan: SchemePlan) -> ButcherTableau:
    """Expand ``plan`` into dense (A, b, c).

    The state-resampling variant at alpha != 0 re-evaluates the rhs at
    resampled states, which cannot be folded into a tableau of reduced size;
    it is rejected.
    """
    if plan.variant == Variant.ALPHA_DEC_U and plan.alpha != 0.0:
        raise UnsupportedExportError(
            "state-resampling schemes with alpha != 0 have no reduced tableau")
    rec = _StageRecorder()
    alpha = plan.alpha
    cur_cf = plan.iterations[0].coeffs
    g0 = rec.register(0.0, np.zeros(0), 0)
    if plan.euler_first_iteration:
        states = [np.zeros(0)] + [np.array([cur_cf.nodes[m]])
                                  for m in range(1, cur_cf.nodes.size)]
        g = [g0] + [None] * (cur_cf.nodes.size - 1)
    else:
        g_star = [g0] + [rec.register(cur_cf.nodes[m], np.zeros(0), 0)
                         for m in range(1, cur_cf.nodes.size)]
        states, g = _sym_pass(rec, cur_cf, g_star, alpha, g0, 1)

    for p in range(2, plan.order + 1):
        spec = plan.iterations[p - 1]
        if plan.variant == Variant.ALPHA_DEC_DU:
            _sym_fill(rec, g, states, cur_cf.nodes, p - 1)
            gmat = _stack(g, rec.count)
            if spec.interp_from_prev is not None:
                gmat = spec.interp_from_prev @ gmat
            g_star = list(gmat)
            cur_cf = spec.coeffs
        else:
            if spec.interp_from_prev is not None:
                smat = _stack(states, rec.count)
                states = list(spec.interp_from_prev @ smat)
                states[0] = np.zeros(0)
                cur_cf = spec.coeffs
                g = [g0] + [None] * (cur_cf.nodes.size - 1)
            _sym_fill(rec, g, states, cur_cf.nodes, p - 1)
            g_star = g
        states, g = _sym_pass(rec, cur_cf, g_star, alpha, g0, p)

    s_total = rec.count
    a_mat = np.zeros((s_total, s_total))
    for i, row in enumerate(rec.rows):
        a_mat[i, : row.size] = row
    return ButcherTableau(
        A=a_mat,
        b=_pad(states[-1], s_total),
        c=np.array(rec.c),
        S=s_total,
        order=plan.order,
        stage_blocks=tuple(rec.blocks),
    )


def stage_count(variant: Variant, alpha_zero: bool, order: int,
                node_family: NodeFamily) -> int:
    """Closed-form stage count of the exported tableau (default first
    iteration).  Matches ``build_tableau(...).S`` whenever that export is
    supported."""
    m = subintervals_for(order, node_family)
    p = order
    if variant == Variant.ALPHA_DEC or variant == Variant.ALPHA_DEC_U:
        if alpha_zero:
            base = m * (p - 1) + 1
            if variant == Variant.ALPHA_DEC_U:
                base -= (m - 1) * (m - 2) // 2
            return base
        return m * p
    if alpha_zero:
        return m * (p - 1) + 1 - m * (m - 1) // 2
    return m * p - m * (m - 1) // 2


def rk_step(tab: ButcherTableau, sys: OdeSystem, t_n: float, u_n: np.ndarray,
            dt: float) -> np.ndarray:
    """One explicit Runge-Kutta step with the given tableau."""
    u_n = np.asarray(u_n, dtype=float)
    k = np.empty((tab.S, u_n.size))
    for i in range(tab.S):
        stage_state = u_n + dt * (tab.A[i, :i] @ k[:i])
        k[i] = sys.rhs(t_n + tab.c[i] * dt, stage_state)
    return u_n + dt * (tab.b @ k)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _json_vector(v) -> str:
    return "[" + ", ".join(_fmt(x) for x in v) + "]"


def tableau_json(plan: SchemePlan, tab: ButcherTableau) -> str:
    """Serialize as JSON with 17 significant digits (lossless for doubles)."""
    rows = ", ".join(_json_vector(row) for row in tab.A)
    return (
        "{"
        f'"order": {tab.order}, '
        f'"variant": "{plan.variant.value}", '
        f'"alpha": {_fmt(plan.alpha)}, '
        f'"nodes": "{plan.node_family.value}", '
        f'"S": {tab.S}, '
        f'"A": [{rows}], '
        f'"b": {_json_vector(tab.b)}, '
        f'"c": {_json_vector(tab.c)}'
        "}"
    )
