"""Weighted measures, perimeters, ratios and the divergence identity."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from halfiso import geometry as geo
from halfiso.geometry import (
    DoubledHalfBall,
    DoubledHalfEllipsoid,
    HalfBall,
    OnWallBall,
    UpAxisBall,
)
from halfiso.params import WeightParams

# frozen with mpmath (30 digits)
SIGMA_2_NEG_HALF = 5.2441151085842396       # B(1/2, 1/4)
SIGMA_2_NEG_09 = 21.353449332480042
RATIO_UNIT_HALF_BALL_300 = 3.8383165853550260   # 2*pi / (2*pi/3)^(2/3)
UPAXIS_MEASURE_T10 = 0.99439360745678885    # N=2, l=0, a=-1/2, t=10
UPAXIS_PERIM_T10 = 1.9906636385708186       # N=2, k=0, a=-1/2, t=10
UPAXIS_MEASURE_L1_T10 = 9.9439204467640080  # N=2, l=1, a=-1/2, t=10
ONWALL_MEASURE_L0 = 3.4960767390561597      # N=2, l=0, a=-1/2 (t-independent)
ONWALL_MEASURE_L1_T10 = 34.985756433489454
ONWALL_PERIM_K1_T10 = 52.528646948565788


def test_sphere_area_and_ball_volume():
    assert_allclose(geo.sphere_area(0), 2.0, rtol=1e-14)
    assert_allclose(geo.sphere_area(1), 2.0 * math.pi, rtol=1e-14)
    assert_allclose(geo.sphere_area(2), 4.0 * math.pi, rtol=1e-14)
    assert_allclose(geo.unit_ball_volume(2), math.pi, rtol=1e-14)
    assert_allclose(geo.unit_ball_volume(3), 4.0 * math.pi / 3.0, rtol=1e-14)


@pytest.mark.parametrize("N,alpha,want", [
    (3, 0.0, 2.0 * math.pi),
    (3, -0.5, 4.0 * math.pi),
    (2, -0.5, SIGMA_2_NEG_HALF),
    (2, -0.9, SIGMA_2_NEG_09),
    (4, 0.0, math.pi ** 2),
])
def test_hemisphere_area_closed_form(N, alpha, want):
    assert_allclose(geo.hemisphere_area_closed_form(N, alpha), want, rtol=1e-13)


@pytest.mark.parametrize("N", [2, 3, 4, 7])
@pytest.mark.parametrize("alpha", [-0.9, -0.5, -0.1, 0.0, 1.0])
def test_hemisphere_area_quadrature_matches_closed_form(N, alpha):
    q = geo.hemisphere_area(N, alpha)
    c = geo.hemisphere_area_closed_form(N, alpha)
    assert abs(q - c) / c <= 1e-10


def test_measure_half_ball_values():
    assert_allclose(geo.measure_half_ball(WeightParams(3, 0.0, 0.0, 0.0), 1.0),
                    2.0 * math.pi / 3.0, rtol=1e-13)
    assert_allclose(geo.measure_half_ball(WeightParams(3, 0.0, 0.0, -0.5), 1.0),
                    4.0 * math.pi / 2.5, rtol=1e-13)


def test_measure_half_ball_scaling_degree():
    p = WeightParams(3, 0.0, 0.0, -0.5)
    assert_allclose(geo.measure_half_ball(p, 2.0),
                    2.0 ** 2.5 * geo.measure_half_ball(p, 1.0), rtol=1e-13)


def test_perimeter_half_ball_values():
    assert_allclose(geo.perimeter_half_ball(WeightParams(3, 0.0, 0.0, 0.0), 1.0),
                    2.0 * math.pi, rtol=1e-13)
    p = WeightParams(2, 0.0, 0.0, -0.5)
    assert_allclose(geo.perimeter_half_ball(p, 1.0), SIGMA_2_NEG_HALF, rtol=1e-13)
    # homogeneity degree k+N+alpha-1 = 0.5
    assert_allclose(geo.perimeter_half_ball(p, 4.0), 2.0 * SIGMA_2_NEG_HALF, rtol=1e-13)


def test_up_axis_measure_unweighted_is_translation_invariant():
    for N, t in [(2, 3.7), (3, 5.0)]:
        p = WeightParams(N, 0.0, 0.0, 0.0)
        for radius in (1.0, 0.5):
            est = geo.measure_ball(p, UpAxisBall(t, radius))
            assert_allclose(est.value, geo.unit_ball_volume(N) * radius ** N, rtol=1e-9)


def test_up_axis_quadrature_against_frozen_oracles():
    est = geo.measure_ball(WeightParams(2, 0.0, 0.0, -0.5), UpAxisBall(10.0))
    assert_allclose(est.value, UPAXIS_MEASURE_T10, rtol=1e-10)
    assert est.error_estimate <= 1e-8 * est.value
    est = geo.measure_ball(WeightParams(2, 0.0, 1.0, -0.5), UpAxisBall(10.0))
    assert_allclose(est.value, UPAXIS_MEASURE_L1_T10, rtol=1e-10)
    est = geo.perimeter_ball(WeightParams(2, 0.0, 0.0, -0.5), UpAxisBall(10.0))
    assert_allclose(est.value, UPAXIS_PERIM_T10, rtol=1e-10)


def test_up_axis_far_field_asymptotics():
    p = WeightParams(2, 0.0, 0.0, -0.5)
    m = geo.measure_ball(p, UpAxisBall(1000.0)).value
    assert abs(m / (math.pi * 1000.0 ** -0.5) - 1.0) < 0.002
    pe = geo.perimeter_ball(p, UpAxisBall(1000.0)).value
    assert abs(pe / (2.0 * math.pi * 1000.0 ** -0.5) - 1.0) < 0.002


def test_on_wall_quadrature_against_frozen_oracles():
    est = geo.measure_ball(WeightParams(2, 0.0, 0.0, -0.5), OnWallBall(10.0))
    assert_allclose(est.value, ONWALL_MEASURE_L0, rtol=1e-10)
    # for l = 0 the weight only sees x_N, so the value is t-independent
    est2 = geo.measure_ball(WeightParams(2, 0.0, 0.0, -0.5), OnWallBall(77.0))
    assert_allclose(est2.value, est.value, rtol=1e-10)
    est = geo.measure_ball(WeightParams(2, 0.0, 1.0, -0.5), OnWallBall(10.0))
    assert_allclose(est.value, ONWALL_MEASURE_L1_T10, rtol=1e-10)
    est = geo.perimeter_ball(WeightParams(2, 1.0, 0.0, -0.5), OnWallBall(10.0))
    assert_allclose(est.value, ONWALL_PERIM_K1_T10, rtol=1e-10)


def test_on_wall_unweighted_perimeter_is_half_circle():
    est = geo.perimeter_ball(WeightParams(2, 0.0, 0.0, 0.0), OnWallBall(5.0))
    assert_allclose(est.value, math.pi, rtol=1e-10)


def test_on_wall_measure_matches_monte_carlo():
    p = WeightParams(2, 0.0, 0.0, -0.5)
    dom = OnWallBall(10.0)
    quad = geo.measure_ball(p, dom)
    mc = geo.mc_measure_ball(p, dom, samples=2_000_000, seed=77)
    assert abs(quad.value - mc.value) <= 3.0 * mc.error_estimate


def test_half_ball_measure_matches_monte_carlo():
    # centered unit half-ball in R^2 with weight x_2^(-1/2)
    from halfiso.quadrature import mc_integrate

    p = WeightParams(2, 0.0, 0.0, -0.5)
    want = geo.measure_half_ball(p, 1.0)
    mc = mc_integrate(
        lambda pts: ((pts ** 2).sum(axis=1) < 1.0) & (pts[:, 1] > 0),
        lambda pts: pts[:, 1] ** -0.5,
        [(-1.0, 1.0), (0.0, 1.0)],
        samples=2_000_000,
        seed=101,
    )
    assert abs(want - mc.value) <= 3.0 * mc.error_estimate


def test_ratio_homogeneity_and_value():
    p = WeightParams(3, 0.0, 0.0, 0.0)
    base = geo.isoperimetric_ratio(p, HalfBall(1.0))
    assert_allclose(base, RATIO_UNIT_HALF_BALL_300, rtol=1e-12)
    for R in (0.5, 2.0, 10.0):
        assert_allclose(geo.isoperimetric_ratio(p, HalfBall(R)), base, rtol=1e-8)


def test_ratio_decay_between_up_axis_balls():
    p = WeightParams(2, 0.0, 0.0, -0.5)
    r100 = geo.isoperimetric_ratio(p, UpAxisBall(100.0))
    r400 = geo.isoperimetric_ratio(p, UpAxisBall(400.0))
    assert abs(r400 / r100 - 4.0 ** (-1.0 / 3.0)) / 4.0 ** (-1.0 / 3.0) < 0.02


def test_radial_constant_routes_agree():
    gen = np.random.Generator(np.random.Philox(key=5))
    for _ in range(20):
        p = WeightParams(int(gen.integers(2, 6)), float(gen.uniform(-0.5, 2)),
                         float(gen.uniform(-0.5, 2)), float(gen.uniform(-0.9, 1.5)))
        a = geo.radial_constant(p)
        b = geo.isoperimetric_ratio(p, HalfBall(1.0))
        assert abs(a - b) / b <= 1e-12


def test_radial_constant_degenerate_exponent():
    # k = l+1 makes the exponent 1 and the constant l+N+alpha
    p = WeightParams(3, 1.5, 0.5, -0.5)
    assert_allclose(geo.radial_constant(p), 0.5 + 3.0 - 0.5, rtol=1e-13)


def test_radius_for_measure_roundtrip_and_monotonicity():
    p = WeightParams(3, 0.0, 0.2, -0.4)
    m = geo.measure_half_ball(p, 1.0)
    assert_allclose(geo.radius_for_measure(p, m), 1.0, rtol=1e-13)
    assert_allclose(geo.radius_for_measure(WeightParams(3, 0.0, 0.0, 0.0), 2.0 * math.pi / 3.0),
                    1.0, rtol=1e-13)
    R1 = geo.radius_for_measure(p, m)
    R2 = geo.radius_for_measure(p, 2.0 * m)
    assert_allclose(R2 / R1, 2.0 ** (1.0 / (p.l + p.N + p.alpha)), rtol=1e-13)


def test_no_solution_region_has_better_trial_domains():
    # wherever half-balls are stable but no minimizer exists, some translated
    # ball already beats the centered ratio
    for N in (2, 3):
        for a in (-0.9, -0.5, -0.1):
            p = WeightParams(N, 0.0, 0.0, a)
            c = geo.radial_constant(p)
            assert any(geo.isoperimetric_ratio(p, UpAxisBall(t)) < c
                       for t in (10.0, 100.0, 1000.0))


def test_divergence_identity_on_balls():
    for (N, l, a, R) in [(2, 0.0, -0.5, 1.0), (3, 0.4, -0.5, 1.3), (2, -0.3, -0.9, 0.7),
                         (4, 0.0, -0.2, 2.0)]:
        p = WeightParams(N, l + 1.0, l, a)
        ident = geo.divergence_check(p, DoubledHalfBall(R))
        assert abs(ident.lhs - ident.mid) <= 1e-8 * abs(ident.mid)
        assert abs(ident.mid - ident.rhs) <= 1e-8 * abs(ident.mid)


def test_divergence_ball_against_closed_form():
    p = WeightParams(3, 1.0, 0.0, -0.5)
    R = 1.3
    ident = geo.divergence_check(p, DoubledHalfBall(R))
    want = 2.0 * R ** (p.l + p.N + p.alpha) * geo.hemisphere_area_closed_form(p.N, p.alpha)
    assert_allclose(ident.mid, want, rtol=1e-10)


def test_divergence_identity_on_ellipsoid_strict():
    p = WeightParams(2, 1.0, 0.0, -0.5)
    ident = geo.divergence_check(p, DoubledHalfEllipsoid((1.0, 2.0)))
    assert abs(ident.lhs - ident.mid) <= 1e-8 * abs(ident.mid)
    assert ident.rhs > ident.mid * (1.0 + 1e-6)


def test_divergence_flux_factor_for_unweighted_wall():
    # alpha = 0, ball: the flux side is exactly R times the surface integral
    p = WeightParams(3, 1.0, 0.0, 0.0)
    R = 1.7
    ident = geo.divergence_check(p, DoubledHalfBall(R))
    surface = 2.0 * R ** (p.l + p.N + p.alpha - 1.0) * geo.hemisphere_area_closed_form(3, 0.0)
    assert_allclose(ident.mid, R * surface, rtol=1e-10)


def test_divergence_requires_matched_exponents():
    with pytest.raises(ValueError):
        geo.divergence_check(WeightParams(2, 0.0, 0.0, -0.5), DoubledHalfBall(1.0))


def test_domain_validation():
    with pytest.raises(ValueError):
        UpAxisBall(0.5, 1.0)
    with pytest.raises(ValueError):
        OnWallBall(0.5)
    with pytest.raises(ValueError):
        DoubledHalfEllipsoid((1.0, -2.0))
    with pytest.raises(ValueError):
        DoubledHalfEllipsoid((1.0, 2.0, 3.0))  # N=3 needs equal leading axes
    with pytest.raises(ValueError):
        geo.weighted_geometry(WeightParams(2, 0.0, 0.0, -1.5), HalfBall(1.0))


def test_divergence_identity_axisymmetric_ellipsoid_n3():
    p = WeightParams(3, 1.2, 0.2, -0.4)
    ident = geo.divergence_check(p, DoubledHalfEllipsoid((1.0, 1.0, 1.6)))
    assert abs(ident.lhs - ident.mid) <= 1e-8 * abs(ident.mid)
    assert ident.rhs > ident.mid * (1.0 + 1e-6)
