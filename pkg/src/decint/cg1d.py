"""Periodic 1D continuous-Galerkin discretization of linear advection
u_t + u_x = 0 with interior-penalty stabilization, advanced in time without
ever inverting the consistent mass matrix.

The deferred-correction update needs only the diagonal weights
C_i = integral of the i-th basis function: each iteration subtracts
(1/C_i) * (consistent-mass defect + quadrature of space residuals) from the
previous iterate.  With Gauss-Lobatto Lagrange bases the C_i additionally
coincide with a diagonal quadrature of the mass matrix, so the semi-discrete
problem can also be handed to the ODE steppers directly (ode mode).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from .coeffs import NodeFamily, lagrange_derivatives, lagrange_values, make_nodes
from .dec_ode import OdeSystem, SchemePlan, Variant, step, time_grid
from .errors import (
    InvalidOrderError,
    InvalidParameterError,
    LumpingError,
    NumericalFailureError,
)

__all__ = [
    "BasisKind",
    "Basis",
    "FemSpace1D",
    "build_space",
    "space_residual",
    "bdec_pde_step",
    "bdecu_pde_step",
    "ode_mode_step",
    "project_l2",
    "compute_errors",
    "run_advection",
]


class BasisKind(Enum):
    BERNSTEIN = "bernstein"
    LAGRANGE = "lagrange"
    LAGRANGE_GL = "lagrange_gl"


@dataclass(frozen=True)
class Basis:
    kind: BasisKind
    degree: int

    def __post_init__(self):
        if self.degree not in (2, 3, 4):
            raise InvalidOrderError(
                f"supported polynomial degrees are 2..4, got {self.degree}")

    @property
    def token(self) -> str:
        prefix = {BasisKind.BERNSTEIN: "b", BasisKind.LAGRANGE: "p",
                  BasisKind.LAGRANGE_GL: "pgl"}[self.kind]
        return f"{prefix}{self.degree}"


def bernstein_values(degree: int, x: np.ndarray) -> np.ndarray:
    """All Bernstein basis polynomials of ``degree`` at points ``x`` on
    [0, 1], built by the degree-raising recursion (stable, no binomials)."""
    x = np.asarray(x, dtype=float)
    vals = np.zeros((x.size, degree + 1))
    vals[:, 0] = 1.0
    for d in range(1, degree + 1):
        prev = vals[:, :d].copy()
        vals[:, : d + 1] = 0.0
        vals[:, 0] = (1.0 - x) * prev[:, 0]
        for j in range(1, d):
            vals[:, j] = x * prev[:, j - 1] + (1.0 - x) * prev[:, j]
        vals[:, d] = x * prev[:, d - 1]
    return vals


def bernstein_derivatives(degree: int, x: np.ndarray) -> np.ndarray:
    lower = bernstein_values(degree - 1, x)
    x = np.asarray(x, dtype=float)
    out = np.zeros((x.size, degree + 1))
    out[:, :degree] -= degree * lower
    out[:, 1:] += degree * lower
    return out


def _reference_basis(basis: Basis):
    """(values, derivatives) callables on the reference element [0, 1]."""
    if basis.kind == BasisKind.BERNSTEIN:
        return (lambda x: bernstein_values(basis.degree, x),
                lambda x: bernstein_derivatives(basis.degree, x))
    if basis.kind == BasisKind.LAGRANGE:
        pts = np.linspace(0.0, 1.0, basis.degree + 1)
    else:
        pts = make_nodes(NodeFamily.GAUSS_LOBATTO, basis.degree).nodes
    return (lambda x: lagrange_values(pts, np.asarray(x, dtype=float)),
            lambda x: lagrange_derivatives(pts, np.asarray(x, dtype=float)))


@dataclass(frozen=True)
class FemSpace1D:
    n_elements: int
    h: float
    basis: Basis
    dof_count: int
    connectivity: np.ndarray      # (n_elements, degree+1) global DoF ids
    lumped_masses: np.ndarray     # C_i = integral of basis function i
    element_mass: np.ndarray      # (degree+1)^2 consistent mass, one element
    mass_global: np.ndarray
    div_global: np.ndarray        # rows test functions, columns trial DoFs
    jump_global: np.ndarray       # CIP bilinear form with h^2 face weight folded in
    quad_nodes: np.ndarray        # reference-element Gauss points
    quad_weights: np.ndarray
    basis_at_quad: np.ndarray     # (n_quad, degree+1)


def _gauss_legendre01(n_points: int):
    x, w = np.polynomial.legendre.leggauss(n_points)
    return 0.5 * (x + 1.0), 0.5 * w


def build_space(n_elements: int, basis: Basis) -> FemSpace1D:
    """Assemble the periodic uniform-mesh space on [0, 1]."""
    if n_elements < 3:
        raise InvalidParameterError("need at least 3 elements for periodic CIP")
    n = basis.degree
    n_local = n + 1
    total = n_elements * n
    h = 1.0 / n_elements
    conn = (np.arange(n_elements)[:, None] * n + np.arange(n_local)) % total

    values_fn, derivs_fn = _reference_basis(basis)
    qx, qw = _gauss_legendre01(n_local)
    vals = values_fn(qx)                      # (q, n_local)
    ders = derivs_fn(qx)

    element_mass = h * (vals.T * qw) @ vals
    local_div = (vals.T * qw) @ ders          # h cancels against 1/h
    local_lump = h * qw @ vals

    mass = np.zeros((total, total))
    div = np.zeros((total, total))
    lump = np.zeros(total)
    for e in range(n_elements):
        idx = conn[e]
        mass[np.ix_(idx, idx)] += element_mass
        div[np.ix_(idx, idx)] += local_div
        lump[idx] += local_lump

    # CIP: one face per element interface; the jump vector holds the
    # difference of one-sided x-derivatives of each basis function there
    d_left = derivs_fn(np.array([1.0]))[0] / h   # element to the left of face
    d_right = derivs_fn(np.array([0.0]))[0] / h  # element to the right
    jump = np.zeros((total, total))
    for e in range(n_elements):
        w_f = np.zeros(total)
        w_f[conn[e - 1]] -= d_left
        w_f[conn[e]] += d_right
        jump += np.outer(w_f, w_f)
    jump *= h * h

    for arr in (conn, lump, element_mass, mass, div, jump, vals):
        arr.setflags(write=False)
    return FemSpace1D(n_elements, h, basis, total, conn, lump, element_mass,
                      mass, div, jump, qx, qw, vals)


def space_residual(space: FemSpace1D, c: np.ndarray,
                   delta_cip: float) -> np.ndarray:
    """Galerkin advection residual plus interior-penalty term, tested
    against every basis function."""
    if delta_cip < 0:
        raise InvalidParameterError("stabilization coefficient must be >= 0")
    out = space.div_global @ c
    if delta_cip != 0.0:
        out = out + delta_cip * (space.jump_global @ c)
    return out


def _require_positive_lumping(space: FemSpace1D) -> None:
    if np.any(space.lumped_masses <= 0.0):
        raise LumpingError(
            "basis has nonpositive integrated weights; the lumped update "
            "is ill-posed")


def _pde_march_step(space: FemSpace1D, plan: SchemePlan, c_n: np.ndarray,
                    dt: float, delta_cip: float, counter: list | None):
    inv_c = 1.0 / space.lumped_masses
    phi0 = space_residual(space, c_n, delta_cip)
    if counter is not None:
        counter[0] += 1
    cf = plan.iterations[0].coeffs
    states = np.tile(c_n, (cf.nodes.size, 1))
    phis = np.tile(phi0, (cf.nodes.size, 1))
    states = states - ((states - c_n) @ space.mass_global
                       + dt * (cf.quad_full @ phis)) * inv_c
    for p in range(2, plan.order + 1):
        spec = plan.iterations[p - 1]
        cf = spec.coeffs
        if spec.interp_from_prev is not None:
            states = spec.interp_from_prev @ states
        phis = np.empty((cf.nodes.size, space.dof_count))
        phis[0] = phi0
        for m in range(1, cf.nodes.size):
            phis[m] = space_residual(space, states[m], delta_cip)
            if counter is not None:
                counter[0] += 1
        states = states - ((states - c_n) @ space.mass_global
                           + dt * (cf.quad_full @ phis)) * inv_c
    if not np.all(np.isfinite(states[-1])):
        raise NumericalFailureError(
            "PDE state became non-finite; the step size is likely outside "
            "the stability region")
    return states[-1].copy()


def bdec_pde_step(space: FemSpace1D, plan: SchemePlan, c_n: np.ndarray,
                  dt: float, delta_cip: float,
                  counter: list | None = None) -> np.ndarray:
    """One mass-matrix-free step on the full node set every iteration."""
    if plan.variant != Variant.ALPHA_DEC or plan.alpha != 0.0:
        raise InvalidParameterError(
            "this update is defined for the fixed-node quadrature scheme")
    _require_positive_lumping(space)
    return _pde_march_step(space, plan, c_n, dt, delta_cip, counter)


def bdecu_pde_step(space: FemSpace1D, plan: SchemePlan, c_n: np.ndarray,
                   dt: float, delta_cip: float,
                   counter: list | None = None) -> np.ndarray:
    """One step with node growth: earlier iterates are carried to the
    refined node set by interpolation in time, DoF-wise."""
    if plan.variant != Variant.ALPHA_DEC_U or plan.alpha != 0.0:
        raise InvalidParameterError(
            "this update is defined for the node-growing quadrature scheme")
    _require_positive_lumping(space)
    return _pde_march_step(space, plan, c_n, dt, delta_cip, counter)


def ode_mode_step(space: FemSpace1D, plan: SchemePlan, c_n: np.ndarray,
                  dt: float, delta_cip: float,
                  counter: list | None = None) -> np.ndarray:
    """Treat dc/dt = -Phi(c)/C_i as an ODE system and take one step of
    ``plan``.  Only Gauss-Lobatto Lagrange bases qualify: their C_i realize a
    high-order diagonal quadrature of the mass matrix."""
    if space.basis.kind != BasisKind.LAGRANGE_GL:
        raise InvalidParameterError(
            "ode mode requires a Gauss-Lobatto Lagrange basis")
    _require_positive_lumping(space)
    inv_c = 1.0 / space.lumped_masses

    def rhs(t: float, c: np.ndarray) -> np.ndarray:
        return -space_residual(space, c, delta_cip) * inv_c

    report = step(plan, OdeSystem(space.dof_count, rhs), 0.0, c_n, dt)
    if counter is not None:
        counter[0] += report.rhs_evaluations
    return report.u_next


def project_l2(space: FemSpace1D, fn: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """Consistent-mass L2 projection of ``fn`` onto the space."""
    qx, qw = _gauss_legendre01(space.basis.degree + 4)
    vals = _reference_basis(space.basis)[0](qx)
    rhs = np.zeros(space.dof_count)
    for e in range(space.n_elements):
        x_phys = (e + qx) * space.h
        rhs[space.connectivity[e]] += space.h * (qw * fn(x_phys)) @ vals
    return np.linalg.solve(space.mass_global, rhs)


def compute_errors(space: FemSpace1D, c: np.ndarray,
                   exact: Callable[[np.ndarray], np.ndarray]):
    """(L1, L2, Linf) of u_h - exact by per-element Gauss quadrature."""
    l1 = 0.0
    l2 = 0.0
    linf = 0.0
    for e in range(space.n_elements):
        u_h = space.basis_at_quad @ c[space.connectivity[e]]
        diff = u_h - exact((e + space.quad_nodes) * space.h)
        l1 += space.h * (space.quad_weights @ np.abs(diff))
        l2 += space.h * (space.quad_weights @ diff**2)
        linf = max(linf, np.abs(diff).max())
    return l1, float(np.sqrt(l2)), linf


STEPPERS = {
    "bdec": (Variant.ALPHA_DEC, bdec_pde_step),
    "bdecu": (Variant.ALPHA_DEC_U, bdecu_pde_step),
    "ode": (Variant.ALPHA_DEC, ode_mode_step),
}


@dataclass
class AdvectionResult:
    space: FemSpace1D
    c0: np.ndarray
    c: np.ndarray
    residual_evaluations: int
    n_steps: int
    errors: tuple[float, float, float]


def run_advection(space: FemSpace1D, scheme: str, order: int,
                  delta_cip: float, cfl: float = 0.1, t_end: float = 1.0,
                  u0: Callable[[np.ndarray], np.ndarray] | None = None,
                  node_family: NodeFamily = NodeFamily.EQUISPACED) -> AdvectionResult:
    """March the advection problem to ``t_end`` with dt = cfl * h and report
    errors against the translated initial profile."""
    if scheme not in STEPPERS:
        raise InvalidParameterError(
            f"unknown scheme {scheme!r}; choose from {sorted(STEPPERS)}")
    if cfl <= 0:
        raise InvalidParameterError("cfl must be positive")
    if u0 is None:
        u0 = lambda x: np.cos(2.0 * np.pi * x)
    from .dec_ode import plan_scheme

    variant, stepper = STEPPERS[scheme]
    plan = plan_scheme(variant, 0.0, order, node_family)
    c = project_l2(space, u0)
    c0 = c.copy()
    counter = [0]
    times = time_grid(0.0, t_end, cfl * space.h)
    for i in range(times.size - 1):
        c = stepper(space, plan, c, times[i + 1] - times[i], delta_cip,
                    counter=counter)
    errors = compute_errors(space, c, lambda x: u0(x - t_end))
    return AdvectionResult(space, c0, c, counter[0], times.size - 1, errors)
