"""p-adaptive stepping: termination, exactness of the growth phase,
plateau behavior."""

import numpy as np
import pytest

from decint import NodeFamily, OdeSystem, Variant, plan_scheme, step
from decint.adaptive import (
    AdaptiveConfig,
    adaptive_integrate,
    adaptive_step,
)
from decint.errors import InvalidParameterError, NumericalFailureError
from decint.problems import linear_system, vibrating_system


def test_config_validation():
    with pytest.raises(InvalidParameterError):
        AdaptiveConfig(Variant.ALPHA_DEC, 0.0, 1e-8)
    with pytest.raises(InvalidParameterError):
        AdaptiveConfig(Variant.ALPHA_DEC_U, 0.0, -1e-8)
    with pytest.raises(InvalidParameterError):
        AdaptiveConfig(Variant.ALPHA_DEC_U, 0.0, 1e-8, p_max=1)
    with pytest.raises(InvalidParameterError):
        AdaptiveConfig(Variant.ALPHA_DEC_U, 2.0, 1e-8)


def test_zero_rhs_stops_immediately():
    cfg = AdaptiveConfig(Variant.ALPHA_DEC_U, 0.0, epsilon=0.0)
    sys_ = OdeSystem(2, lambda t, u: np.zeros(2))
    res = adaptive_step(cfg, sys_, 0.0, np.array([1.0, -2.0]), 0.5)
    assert res.p_used == 2 and res.converged
    np.testing.assert_array_equal(res.u_next, [1.0, -2.0])


def test_huge_tolerance_stops_at_two():
    cfg = AdaptiveConfig(Variant.ALPHA_DEC_DU, 1.0, epsilon=1e10)
    prob = vibrating_system()
    res = adaptive_step(cfg, prob.system, 0.0, prob.u0, 0.1)
    assert res.p_used == 2 and res.converged


def test_nonconvergence_flag():
    cfg = AdaptiveConfig(Variant.ALPHA_DEC_U, 0.0, epsilon=0.0, p_max=4)
    prob = vibrating_system()
    res = adaptive_step(cfg, prob.system, 0.0, prob.u0, 0.1)
    assert res.p_used == 4 and not res.converged


@pytest.mark.parametrize("family", list(NodeFamily))
@pytest.mark.parametrize("variant,alpha", [
    (Variant.ALPHA_DEC_U, 0.0), (Variant.ALPHA_DEC_U, 1.0),
    (Variant.ALPHA_DEC_DU, 0.0), (Variant.ALPHA_DEC_DU, 1.0),
])
def test_growth_phase_matches_fixed_order_iterates(family, variant, alpha):
    # forcing p_max iterations reproduces, bitwise, the matching iterate of
    # a fixed-order plan whose growth phase is still running at that point
    p_stop = 4
    order = p_stop + 1 if family == NodeFamily.EQUISPACED else 2 * p_stop - 1
    prob = vibrating_system()
    plan = plan_scheme(variant, alpha, order, family)
    rep = step(plan, prob.system, 0.0, prob.u0, 0.07, record_iterates=True)
    cfg = AdaptiveConfig(variant, alpha, epsilon=0.0, p_max=p_stop,
                         node_family=family)
    res = adaptive_step(cfg, prob.system, 0.0, prob.u0, 0.07)
    np.testing.assert_array_equal(res.u_next, rep.iterate_finals[p_stop - 1])


def test_adaptive_error_plateau_on_linear_problem():
    prob = linear_system()
    cfg = AdaptiveConfig(Variant.ALPHA_DEC_U, 0.0, epsilon=1e-8)
    errors = []
    for denom in (8, 16, 32, 64):
        run = adaptive_integrate(cfg, prob.system, 0.0, prob.u0, 1.0,
                                 1.0 / denom)
        assert run.all_converged
        errors.append(np.linalg.norm(run.trajectory.states[-1]
                                     - prob.exact(1.0)))
    errors = np.array(errors)
    assert errors.max() <= 1e-5
    assert errors.max() / errors.min() <= 100.0


def test_mean_iterations_decrease_with_dt():
    prob = linear_system()
    cfg = AdaptiveConfig(Variant.ALPHA_DEC_DU, 1.0, epsilon=1e-8)
    means = []
    for denom in (8, 16, 32, 64, 128):
        run = adaptive_integrate(cfg, prob.system, 0.0, prob.u0, 1.0,
                                 1.0 / denom)
        means.append(run.mean_p)
    assert all(a >= b for a, b in zip(means, means[1:]))
    assert means[-1] < means[0]


def test_single_step_statistics():
    prob = vibrating_system()
    cfg = AdaptiveConfig(Variant.ALPHA_DEC_U, 0.0, epsilon=1e-6)
    run = adaptive_integrate(cfg, prob.system, 0.0, prob.u0, 0.1, 0.1)
    assert run.p_used.size == 1
    assert run.std_p == 0.0
    assert run.mean_p == run.p_used[0]


def test_adaptive_numerical_failure_context():
    cfg = AdaptiveConfig(Variant.ALPHA_DEC_U, 0.0, epsilon=1e-8)
    blowup = OdeSystem(1, lambda t, u: np.array([float("nan")]))
    with pytest.raises(NumericalFailureError) as info:
        adaptive_integrate(cfg, blowup, 0.0, np.array([1.0]), 1.0, 0.5)
    assert info.value.step_index == 0
