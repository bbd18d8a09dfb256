"""decint: arbitrary-order deferred-correction time integrators and tooling.

Public surface: node/coefficient construction (:mod:`decint.coeffs`), the
single-step integrators and planner (:mod:`decint.dec_ode`), Runge-Kutta
tableau export (:mod:`decint.rk_export`), linear stability analysis
(:mod:`decint.stability`), the p-adaptive stepper (:mod:`decint.adaptive`),
analytic test problems (:mod:`decint.problems`), a 1D continuous-Galerkin
advection solver (:mod:`decint.cg1d`), and the benchmark harness
(:mod:`decint.bench`, CLI in :mod:`decint.cli`).
"""

from .coeffs import (
    DecCoefficients,
    NodeFamily,
    NodeSet,
    make_coefficients,
    make_interp_matrix,
    make_nodes,
)
from .dec_ode import (
    OdeSystem,
    SchemePlan,
    StepReport,
    Variant,
    integrate,
    plan_scheme,
    sdec_residual_step,
    step,
)

__all__ = [
    "DecCoefficients",
    "NodeFamily",
    "NodeSet",
    "OdeSystem",
    "SchemePlan",
    "StepReport",
    "Variant",
    "integrate",
    "make_coefficients",
    "make_interp_matrix",
    "make_nodes",
    "plan_scheme",
    "sdec_residual_step",
    "step",
]
