"""p-adaptive stepping: grow the node count each iteration until successive
iterates agree at the step's right endpoint.

Unlike the fixed-order growing variants, the node count here is not capped:
iteration p always works on p panels, and the loop exits at the first p >= 2
satisfying ||u_end^(p) - u_end^(p-1)|| <= eps * ||u_end^(p)|| (Euclidean
norm; absolute comparison when the new iterate vanishes).  Each extra
iteration buys one order of accuracy, so the exit index adapts the order to
the local behavior of the solution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coeffs import (
    DecCoefficients,
    NodeFamily,
    make_coefficients,
    make_interp_matrix,
    make_nodes,
)
from .dec_ode import (
    OdeSystem,
    Trajectory,
    Variant,
    _correction_pass,
    _fill_rhs,
    _make_rhs_evaluator,
    time_grid,
)
from .errors import InvalidParameterError, NumericalFailureError

__all__ = [
    "AdaptiveConfig",
    "AdaptiveStepResult",
    "AdaptiveRunResult",
    "adaptive_step",
    "adaptive_integrate",
]

_COEFF_CACHE: dict[tuple[NodeFamily, int], DecCoefficients] = {}
_GROWTH_CACHE: dict[tuple[NodeFamily, int], np.ndarray] = {}


def _cf(family: NodeFamily, panels: int) -> DecCoefficients:
    key = (family, panels)
    if key not in _COEFF_CACHE:
        _COEFF_CACHE[key] = make_coefficients(make_nodes(family, panels))
    return _COEFF_CACHE[key]


def _growth(family: NodeFamily, panels_from: int) -> np.ndarray:
    key = (family, panels_from)
    if key not in _GROWTH_CACHE:
        mat = make_interp_matrix(_cf(family, panels_from).node_set,
                                 _cf(family, panels_from + 1).node_set)
        mat.setflags(write=False)
        _GROWTH_CACHE[key] = mat
    return _GROWTH_CACHE[key]


@dataclass(frozen=True)
class AdaptiveConfig:
    variant: Variant
    alpha: float
    epsilon: float
    p_max: int = 15
    node_family: NodeFamily = NodeFamily.EQUISPACED

    def __post_init__(self):
        if self.variant not in (Variant.ALPHA_DEC_U, Variant.ALPHA_DEC_DU):
            raise InvalidParameterError(
                "adaptive stepping needs a node-growing variant")
        if not (0.0 <= self.alpha <= 1.0):
            raise InvalidParameterError(f"alpha must lie in [0, 1], got {self.alpha!r}")
        if self.epsilon < 0.0:
            raise InvalidParameterError("epsilon must be nonnegative")
        if self.p_max < 2:
            raise InvalidParameterError("p_max must be at least 2")


@dataclass
class AdaptiveStepResult:
    u_next: np.ndarray
    p_used: int
    rhs_evaluations: int
    converged: bool


@dataclass
class AdaptiveRunResult:
    trajectory: Trajectory
    p_used: np.ndarray
    all_converged: bool

    @property
    def mean_p(self) -> float:
        return float(self.p_used.mean())

    @property
    def std_p(self) -> float:
        return float(self.p_used.std())


def adaptive_step(cfg: AdaptiveConfig, sys: OdeSystem, t_n: float,
                  u_n: np.ndarray, dt: float) -> AdaptiveStepResult:
    if dt <= 0:
        raise InvalidParameterError(f"dt must be positive, got {dt!r}")
    u_n = np.asarray(u_n, dtype=float)
    counter = [0]
    eval_rhs = _make_rhs_evaluator(sys, counter)
    alpha = cfg.alpha
    family = cfg.node_family

    # iteration 1: Euler prediction on a single panel
    cf = _cf(family, 1)
    times = cf.node_set.times(t_n, dt)
    g0 = eval_rhs(times[0], u_n, 0, 0)
    states = u_n + dt * np.outer(cf.nodes, g0)
    states[0] = u_n
    g = np.empty_like(states)
    valid = np.zeros(2, dtype=bool)
    g[0] = g0
    valid[0] = True
    prev_end = states[-1].copy()

    converged = False
    p_used = cfg.p_max
    for p in range(2, cfg.p_max + 1):
        grow = _growth(family, p - 1)
        cf_new = _cf(family, p)
        if cfg.variant == Variant.ALPHA_DEC_DU:
            _fill_rhs(g, valid, states, times, eval_rhs, p - 1)
            g_star = grow @ g
            times = cf_new.node_set.times(t_n, dt)
        else:
            states = grow @ states
            states[0] = u_n
            times = cf_new.node_set.times(t_n, dt)
            g = np.empty((p + 1, u_n.size))
            valid = np.zeros(p + 1, dtype=bool)
            g[0] = g0
            valid[0] = True
            _fill_rhs(g, valid, states, times, eval_rhs, p - 1)
            g_star = g
        states, g, valid = _correction_pass(u_n, times, dt, cf_new, g_star,
                                            alpha, eval_rhs, g0, p)
        new_end = states[-1]
        if not np.all(np.isfinite(new_end)):
            raise NumericalFailureError(
                f"non-finite state at t={t_n!r} (iteration {p})",
                t=t_n, iteration=p)
        scale = np.linalg.norm(new_end)
        gap = np.linalg.norm(new_end - prev_end)
        if (gap <= cfg.epsilon * scale) if scale > 0.0 else (gap <= cfg.epsilon):
            converged = True
            p_used = p
            break
        prev_end = new_end.copy()
    return AdaptiveStepResult(states[-1].copy(), p_used, counter[0], converged)


def adaptive_integrate(cfg: AdaptiveConfig, sys: OdeSystem, t0: float,
                       u0: np.ndarray, t_end: float, dt: float) -> AdaptiveRunResult:
    times = time_grid(t0, t_end, dt)
    n_steps = times.size - 1
    states = np.empty((n_steps + 1, sys.dimension))
    states[0] = np.asarray(u0, dtype=float)
    p_used = np.empty(n_steps, dtype=int)
    total_evals = 0
    all_ok = True
    for i in range(n_steps):
        try:
            res = adaptive_step(cfg, sys, times[i], states[i],
                                times[i + 1] - times[i])
        except NumericalFailureError as exc:
            exc.step_index = i
            raise
        states[i + 1] = res.u_next
        p_used[i] = res.p_used
        total_evals += res.rhs_evaluations
        all_ok = all_ok and res.converged
    return AdaptiveRunResult(Trajectory(times, states, total_evals),
                             p_used, all_ok)
