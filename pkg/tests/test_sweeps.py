"""Trial families: exponent predictions, sweeps, whole-space experiments."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from halfiso import sweeps as sw
from halfiso.params import WeightParams

# frozen with mpmath (30 digits), weight h(r) = exp((r-1)^2)
CENTERED_MEASURE_R03 = 0.54264659627010993
OFFCENTER_MEASURE = 0.13188157762819800     # center 0.8, rho 0.2
OFFCENTER_PERIM = 1.3297478413710883
POWER_OFFCENTER = 0.95640093758994240       # h=1/r, center 50, radius 3.9

EXP_WEIGHT = sw.exp_poly_weight(1.0, -2.0, 1.0)  # exp((r-1)^2)


def test_predicted_exponents():
    assert_allclose(sw.predicted_exponent(WeightParams(2, 0.0, 0.0, -0.5), sw.Family.UP_AXIS),
                    -1.0 / 3.0, rtol=1e-14)
    assert_allclose(sw.predicted_exponent(WeightParams(2, 0.0, 1.0, -0.5), sw.Family.ON_WALL),
                    -0.2, rtol=1e-13)
    # unweighted k = l = 0 is translation invariant
    assert sw.predicted_exponent(WeightParams(3, 0.0, 0.0, 0.0), sw.Family.UP_AXIS) == 0.0
    # general alpha = 0, k = l gives k/(k+N)
    p = WeightParams(3, 1.0, 1.0, 0.0)
    assert_allclose(sw.predicted_exponent(p, sw.Family.UP_AXIS), 1.0 / 4.0, rtol=1e-14)


def test_run_sweep_matches_prediction():
    p = WeightParams(2, 0.0, 0.0, -0.5)
    res = sw.run_sweep(p, sw.Family.UP_AXIS, np.geomspace(10.0, 200.0, 6))
    assert abs(res.fitted_slope - res.predicted_slope) < 0.01
    assert res.slope_stderr < 1e-3
    # predicted slope negative: the ratio must decay along the family
    assert res.rows[-1].ratio < res.rows[0].ratio


def test_run_sweep_on_wall_family():
    p = WeightParams(2, 0.0, 1.0, -0.5)
    res = sw.run_sweep(p, sw.Family.ON_WALL, np.geomspace(10.0, 200.0, 6))
    assert abs(res.fitted_slope - (-0.2)) < 0.01


def test_run_sweep_translation_invariant_case():
    p = WeightParams(2, 0.0, 0.0, 0.0)
    res = sw.run_sweep(p, sw.Family.UP_AXIS, np.geomspace(10.0, 200.0, 6))
    assert abs(res.fitted_slope) < 0.005


def test_fit_approaches_prediction_as_tail_recedes():
    p = WeightParams(2, 0.3, 0.4, -0.5)
    grid = np.geomspace(10.0, 1000.0, 12)
    res_all = sw.run_sweep(p, sw.Family.UP_AXIS, grid, tail_fraction=1.0)
    gaps = []
    for frac in (1.0, 0.6, 0.4):
        res = sw.run_sweep(p, sw.Family.UP_AXIS, grid, tail_fraction=frac)
        gaps.append(abs(res.fitted_slope - res.predicted_slope))
    assert gaps[0] >= gaps[1] >= gaps[2] - 1e-12
    assert res_all.predicted_slope == res.predicted_slope


def test_run_sweep_parallel_rows_are_identical():
    p = WeightParams(2, 0.0, 0.0, -0.5)
    grid = np.geomspace(10.0, 100.0, 5)
    serial = sw.run_sweep(p, sw.Family.UP_AXIS, grid, jobs=1)
    parallel = sw.run_sweep(p, sw.Family.UP_AXIS, grid, jobs=3)
    assert serial == parallel


def test_run_sweep_records_row_failures_without_aborting(monkeypatch):
    real = sw.weighted_geometry
    grid = np.geomspace(10.0, 1000.0, 12)
    broken_t = float(grid[-2])

    def flaky(params, domain, _real=real):
        if getattr(domain, "t", None) == broken_t:
            raise RuntimeError("synthetic quadrature failure")
        return _real(params, domain)

    monkeypatch.setattr(sw, "weighted_geometry", flaky)
    res = sw.run_sweep(WeightParams(2, 0.0, 0.0, -0.5), sw.Family.UP_AXIS, grid)
    bad = [r for r in res.rows if r.error]
    assert len(bad) == 1 and bad[0].t == broken_t
    assert abs(res.fitted_slope - res.predicted_slope) < 0.01
    # with too few surviving tail rows the fit refuses
    short = np.geomspace(10.0, broken_t, 4)
    with pytest.raises(RuntimeError):
        sw.run_sweep(WeightParams(2, 0.0, 0.0, -0.5), sw.Family.UP_AXIS, short)


def test_run_sweep_rejects_bad_grids():
    p = WeightParams(2, 0.0, 0.0, -0.5)
    with pytest.raises(ValueError):
        sw.run_sweep(p, sw.Family.UP_AXIS, [1.5, 10.0])
    with pytest.raises(ValueError):
        sw.run_sweep(p, sw.Family.UP_AXIS, [10.0, 5.0])


def test_radial_weight_evaluation_and_derivative():
    h = EXP_WEIGHT
    assert_allclose(h(1.0), 1.0, rtol=1e-15)
    assert_allclose(h(0.0), math.e, rtol=1e-15)
    assert_allclose(h.derivative(0.5), 2.0 * (0.5 - 1.0) * h(0.5), rtol=1e-13)
    pw = sw.power_weight(-1.0)
    assert_allclose(pw(2.0), 0.5, rtol=1e-15)
    assert_allclose(pw.derivative(2.0), -0.25, rtol=1e-15)


def test_weight_admissibility_checks():
    sw.check_counterexample_weight(EXP_WEIGHT, 1.0)
    with pytest.raises(ValueError):
        sw.check_counterexample_weight(sw.exp_poly_weight(0.0, 2.0), 1.0)  # increasing
    with pytest.raises(ValueError):
        sw.check_counterexample_weight(sw.exp_poly_weight(0.0, 0.0, -1.0), 1.0)  # concave log
    with pytest.raises(ValueError):
        sw.check_counterexample_weight(sw.power_weight(0.5), 1.0)


def test_centered_ball_quantities():
    assert_allclose(sw.centered_ball_measure(EXP_WEIGHT, 2, 0.3), CENTERED_MEASURE_R03, rtol=1e-11)
    assert_allclose(sw.centered_ball_perimeter(EXP_WEIGHT, 2, 0.3),
                    2.0 * math.pi * 0.3 * math.exp(0.49), rtol=1e-13)
    # power weight has a closed form
    assert_allclose(sw.centered_ball_measure(sw.power_weight(-1.0), 2, 2.0),
                    2.0 * math.pi * 2.0, rtol=1e-13)


def test_offcenter_ball_quantities():
    assert_allclose(sw.offcenter_ball_measure(EXP_WEIGHT, 2, 0.8, 0.2), OFFCENTER_MEASURE, rtol=1e-11)
    assert_allclose(sw.offcenter_ball_perimeter(EXP_WEIGHT, 2, 0.8, 0.2), OFFCENTER_PERIM, rtol=1e-11)
    assert_allclose(sw.offcenter_ball_measure(sw.power_weight(-1.0), 2, 50.0, 3.9),
                    POWER_OFFCENTER, rtol=1e-11)


def test_offcenter_matches_monte_carlo():
    mc = sw.mc_offcenter_ball_measure(EXP_WEIGHT, 2, 0.8, 0.2, samples=1_000_000, seed=500)
    assert abs(mc.value - OFFCENTER_MEASURE) <= 3.0 * mc.error_estimate


def test_constant_weight_gives_equal_perimeters():
    flat = sw.exp_poly_weight(0.0)
    d = 0.05
    R = math.sqrt(d / math.pi)
    # centered and off-center balls of equal measure coincide up to translation
    assert_allclose(sw.centered_ball_measure(flat, 2, R), d, rtol=1e-12)
    assert_allclose(sw.offcenter_ball_measure(flat, 2, 0.7, R), d, rtol=1e-10)
    assert_allclose(sw.offcenter_ball_perimeter(flat, 2, 0.7, R),
                    sw.centered_ball_perimeter(flat, 2, R), rtol=1e-12)


def test_counterexample_threshold_certificate():
    d0 = sw.certified_measure_threshold(EXP_WEIGHT, 2, 1.0)
    assert d0 > 0
    assert sw._threshold_conditions(EXP_WEIGHT, 2, 1.0, d0)
    assert not sw._threshold_conditions(EXP_WEIGHT, 2, 1.0, 2.0 * d0)


def test_counterexample_comparison():
    d0 = sw.certified_measure_threshold(EXP_WEIGHT, 2, 1.0)
    cmp_ = sw.compare_equal_measure_balls(EXP_WEIGHT, 2, 1.0, d0 / 2.0)
    # equal measures by construction
    assert_allclose(sw.centered_ball_measure(EXP_WEIGHT, 2, cmp_.R_centered), cmp_.d, rtol=1e-9)
    assert_allclose(sw.offcenter_ball_measure(EXP_WEIGHT, 2, cmp_.center, cmp_.rho),
                    cmp_.d, rtol=1e-9)
    # the counterexample proper
    assert cmp_.perimeter_offcenter < cmp_.perimeter_centered * (1.0 - 1e-3)
    # chain endpoints and the two sound intermediate steps
    a, b, c, dd = cmp_.chain
    assert a < b
    assert c < dd
    assert cmp_.corrected_radius_margin > 0.0


def test_displayed_radius_bound_margin_is_reported_faithfully():
    """Regression-pins the value of the as-displayed radius bound margin.

    The source chain's bound rho < (h(R)/h(r0))^(1/N) R inverts the
    monotonicity of the decreasing weight (its supremum over the centered
    ball sits at the origin, not at radius R) and is genuinely violated
    here; the module must report the violation rather than hide it.  The
    faithful pass/fail statement of that bound lives in the acceptance
    battery (A10-cruc2), where it is the one intentional red.  The value
    below was confirmed with an independent mpmath computation.
    """
    d0 = sw.certified_measure_threshold(EXP_WEIGHT, 2, 1.0)
    cmp_ = sw.compare_equal_measure_balls(EXP_WEIGHT, 2, 1.0, d0 / 2.0)
    assert cmp_.radius_comparison_margin == pytest.approx(-0.003382, abs=2e-4)


def test_comparison_rejects_oversized_measure():
    with pytest.raises(ValueError):
        sw.compare_equal_measure_balls(EXP_WEIGHT, 2, 1.0, 50.0)


def test_vanishing_family_asymptotics():
    rows = sw.vanishing_perimeter_family(1.0, 1.0, 1.0, 1.0, 2, 1.0,
                                         np.geomspace(30.0, 1000.0, 6))
    for r in rows:
        assert abs(r.R - math.sqrt(r.t / math.pi)) / r.R < 0.02
    slope, _ = sw._ols_loglog([r.t for r in rows], [r.perimeter for r in rows])
    assert abs(slope + 0.5) < 0.01
    gaps = [r.t - r.R for r in rows]
    assert all(b > a for a, b in zip(gaps, gaps[1:]))


def test_vanishing_family_measure_is_held_fixed():
    rows = sw.vanishing_perimeter_family(1.0, 1.0, 1.0, 2.5, 2, 0.7, [50.0, 120.0])
    g = sw.power_weight(-1.0)
    for r in rows:
        assert_allclose(2.5 * sw.offcenter_ball_measure(g, 2, r.t, r.R), 0.7, rtol=1e-8)


def test_vanishing_family_critical_decay():
    # beta = N keeps R(t)/t pinned at a fixed fraction below 1
    rows = sw.vanishing_perimeter_family(1.5, 2.0, 1.0, 1.0, 2, 1.0, [100.0, 400.0, 1600.0])
    fractions = [r.R / r.t for r in rows]
    assert max(fractions) < 1.0 - 1e-3
    assert max(fractions) - min(fractions) < 1e-6


def test_vanishing_family_guards():
    with pytest.raises(ValueError):
        sw.vanishing_perimeter_family(0.0, 0.0, 1.0, 1.0, 2, 1.0, [10.0])
    with pytest.raises(ValueError):
        sw.vanishing_perimeter_family(1.0, 3.0, 1.0, 1.0, 2, 1.0, [10.0])  # beta > N
    with pytest.raises(ValueError):
        sw.vanishing_perimeter_family(0.4, 1.0, 1.0, 1.0, 2, 1.0, [10.0])  # below (N-1)b/N
