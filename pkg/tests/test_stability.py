"""Stability polynomials: truncated-exponential theorem, region scans."""

import math

import numpy as np
import pytest

from decint import NodeFamily, Variant, plan_scheme
from decint.errors import InvalidParameterError
from decint.rk_export import ButcherTableau, build_tableau
from decint.stability import (
    StabilityPolynomial,
    real_axis_limit,
    region_grid,
    stability_polynomial,
    write_region_csv,
    write_region_pgm,
)


def poly_for(variant, alpha, order, family):
    return stability_polynomial(build_tableau(plan_scheme(
        variant, alpha, order, family)))


def test_explicit_euler_polynomial():
    tab = ButcherTableau(A=np.zeros((1, 1)), b=np.ones(1), c=np.zeros(1),
                         S=1, order=1)
    poly = stability_polynomial(tab)
    np.testing.assert_array_equal(poly.coefficients, [1.0, 1.0])


@pytest.mark.parametrize("family", list(NodeFamily))
@pytest.mark.parametrize("variant", list(Variant))
@pytest.mark.parametrize("order", range(3, 14))
def test_alpha_zero_polynomial_is_truncated_exponential(family, variant, order):
    # theorem: degree collapses to the order, independent of the node family
    poly = poly_for(variant, 0.0, order, family)
    assert poly.degree == order
    for r in range(order + 1):
        assert abs(poly.coefficients[r] - 1.0 / math.factorial(r)) < 1e-10


@pytest.mark.parametrize("order", range(3, 9))
def test_consistency_terms_any_alpha(order):
    poly = poly_for(Variant.ALPHA_DEC, 1.0, order, NodeFamily.GAUSS_LOBATTO)
    for r in range(order + 1):
        assert abs(poly.coefficients[r] - 1.0 / math.factorial(r)) < 1e-10
    assert poly.degree >= order


def test_sweep_order3_polynomial_matches_sampled_oracle():
    # fit a polynomial through R(z) sampled by running one step on u' = z u
    from decint import OdeSystem, step

    poly = poly_for(Variant.ALPHA_DEC, 1.0, 3, NodeFamily.EQUISPACED)
    zs = np.linspace(-2.0, 1.5, 8)
    samples = []
    plan = plan_scheme(Variant.ALPHA_DEC, 1.0, 3, NodeFamily.EQUISPACED)
    for z in zs:
        sys_ = OdeSystem(1, lambda t, u, z=z: z * u)
        samples.append(step(plan, sys_, 0.0, np.array([1.0]), 1.0).u_next[0])
    fitted = np.polynomial.polynomial.polyfit(zs, samples, poly.degree)
    np.testing.assert_allclose(fitted, poly.coefficients, atol=1e-9)


def test_sweep_resampling_variants_share_polynomials():
    # state resampling and rhs resampling agree on linear problems, so their
    # stability polynomials coincide; compare du against u via tableaux of
    # the rhs-resampling scheme and the sweep scheme where exportable
    for family in NodeFamily:
        for order in range(3, 10):
            p_du = poly_for(Variant.ALPHA_DEC_DU, 1.0, order, family)
            p_u = poly_for(Variant.ALPHA_DEC_U, 0.0, order, family)
            p_bdu = poly_for(Variant.ALPHA_DEC_DU, 0.0, order, family)
            np.testing.assert_allclose(p_u.coefficients, p_bdu.coefficients,
                                       atol=1e-12)
            assert p_du.degree >= order


def test_real_axis_interval_order3():
    poly = poly_for(Variant.ALPHA_DEC, 0.0, 3, NodeFamily.EQUISPACED)
    # oracle: |1 + z + z^2/2 + z^3/6| = 1 first crossing below zero
    limit = real_axis_limit(poly)
    assert abs(limit - (-2.5127)) < 1e-3


def test_region_grid_values_and_symmetry():
    poly = poly_for(Variant.ALPHA_DEC, 0.0, 4, NodeFamily.EQUISPACED)
    grid = region_grid(poly, (-4.0, 1.0), (-3.0, 3.0), 51, 61)
    # z = 0 sits on the boundary
    i0 = np.argmin(np.abs(grid.re_axis))
    j0 = np.argmin(np.abs(grid.im_axis))
    assert abs(grid.magnitudes[i0, j0] - 1.0) < 1e-12
    # symmetric imaginary range -> mirror symmetry
    np.testing.assert_allclose(grid.magnitudes, grid.magnitudes[:, ::-1],
                               atol=1e-12)
    # interior sample check against direct evaluation
    z = grid.re_axis[7] + 1j * grid.im_axis[11]
    assert abs(grid.magnitudes[7, 11] - abs(poly(z))) < 1e-14


def test_region_grid_validation():
    poly = StabilityPolynomial(np.array([1.0, 1.0]))
    with pytest.raises(InvalidParameterError):
        region_grid(poly, (0.0, 0.0), (-1.0, 1.0), 10, 10)
    with pytest.raises(InvalidParameterError):
        region_grid(poly, (-1.0, 1.0), (-1.0, 1.0), 1, 10)


def test_region_writers(tmp_path):
    poly = poly_for(Variant.ALPHA_DEC, 0.0, 3, NodeFamily.EQUISPACED)
    grid = region_grid(poly, (-3.0, 1.0), (-2.0, 2.0), 16, 12)
    csv_path = tmp_path / "region.csv"
    pgm_path = tmp_path / "region.pgm"
    write_region_csv(grid, str(csv_path))
    write_region_pgm(grid, str(pgm_path))
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "re,im,magnitude"
    assert len(lines) == 1 + 16 * 12
    re0, im0, mag0 = map(float, lines[1].split(","))
    assert (re0, im0) == (-3.0, -2.0)
    assert mag0 == grid.magnitudes[0, 0]
    raw = pgm_path.read_bytes()
    header = b"P5\n16 12\n255\n"
    assert raw.startswith(header)
    pixels = np.frombuffer(raw[len(header):], dtype=np.uint8).reshape(12, 16)
    assert pixels.size == 16 * 12
    assert set(np.unique(pixels)) <= {0, 255}
    # origin (re = 0 at column 12, im = 0 between rows) must be stable white
    col = np.argmin(np.abs(grid.re_axis))
    row = 12 - 1 - np.argmin(np.abs(grid.im_axis))
    assert pixels[row, col] == 255
