"""Stereographic coordinate maps, area density and gradient pullback."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from halfiso import stereographic as st


def _random_hemisphere_point(gen, N):
    z = gen.normal(size=N)
    z /= np.linalg.norm(z)
    z[-1] = abs(z[-1])
    return z / np.linalg.norm(z)


def test_pole_and_equator_map():
    assert_allclose(st.to_disk(np.array([0.0, 0.0, 1.0])), [0.0, 0.0], atol=1e-15)
    assert_allclose(st.to_disk(np.array([1.0, 0.0, 0.0])), [1.0, 0.0], atol=1e-15)
    assert_allclose(st.from_disk(np.zeros(2)), [0.0, 0.0, 1.0], atol=1e-15)
    z = st.from_disk(np.array([1.0, 0.0]))
    assert_allclose(z[-1], 0.0, atol=1e-15)


def test_from_disk_half_point():
    assert_allclose(st.from_disk(np.array([0.5, 0.0])), [0.8, 0.0, 0.6], rtol=1e-15)


@pytest.mark.parametrize("N", [2, 3, 4, 6])
def test_roundtrips(N):
    gen = np.random.Generator(np.random.Philox(key=100 + N))
    for _ in range(2500):
        z = _random_hemisphere_point(gen, N)
        y = st.to_disk(z)
        back = st.from_disk(y)
        assert np.max(np.abs(back - z)) <= 1e-12
        assert abs(np.linalg.norm(back) - 1.0) <= 1e-12
        y2 = st.to_disk(back)
        assert np.max(np.abs(y2 - y)) <= 1e-12


def test_density_values():
    assert_allclose(st.weighted_area_density(np.zeros(2), 3, -0.5), 4.0, rtol=1e-15)
    assert_allclose(st.weighted_area_density(np.array([0.5]), 2, 0.0), 1.6, rtol=1e-15)


def test_density_flags_singular_ring():
    with pytest.raises(ValueError):
        st.weighted_area_density(np.array([1.0, 0.0]), 3, -0.5)
    # nonnegative exponents are fine on the ring
    st.weighted_area_density(np.array([1.0, 0.0]), 3, 0.0)


@pytest.mark.parametrize("N", [2, 3, 4])
@pytest.mark.parametrize("alpha", [-0.9, -0.5, 0.0, 1.0])
def test_area_routes_agree(N, alpha):
    assert st.consistency_gap(N, alpha) <= 1e-8


def test_tangent_frame_is_orthonormal():
    gen = np.random.Generator(np.random.Philox(key=40))
    for N in (2, 3, 5):
        z = _random_hemisphere_point(gen, N)
        frame = st.tangent_frame(z)
        assert frame.shape == (N - 1, N)
        gram = frame @ frame.T
        assert_allclose(gram, np.eye(N - 1), atol=1e-12)
        assert_allclose(frame @ z, np.zeros(N - 1), atol=1e-12)


def test_gradient_pullback_constant():
    lhs, rhs = st.gradient_pullback_check(lambda y: 1.0, lambda y: np.zeros(len(y)),
                                          np.array([0.2, 0.1]))
    assert lhs <= 1e-9 and rhs == 0.0


def test_gradient_pullback_linear_at_center():
    lhs, rhs = st.gradient_pullback_check(lambda y: y[0],
                                          lambda y: np.eye(len(y))[0], np.zeros(2))
    # conformal factor at the center is 2; gradients scale by its inverse
    assert_allclose(rhs, 0.5, rtol=1e-15)
    assert abs(lhs - rhs) <= 1e-5


def test_gradient_pullback_quadratic_critical_point():
    lhs, rhs = st.gradient_pullback_check(lambda y: float(np.dot(y, y)),
                                          lambda y: 2.0 * np.asarray(y), np.zeros(3))
    assert rhs == 0.0 and lhs <= 1e-4 * 1e-4  # second-order FD remainder only


def test_gradient_pullback_generic_points():
    gen = np.random.Generator(np.random.Philox(key=41))
    for _ in range(25):
        N = int(gen.integers(2, 5))
        y = gen.uniform(-0.5, 0.5, size=N - 1)
        w = gen.normal(size=N - 1)

        def f(yy, w=w):
            return float(np.sin(np.dot(w, yy)))

        def df(yy, w=w):
            return np.cos(np.dot(w, yy)) * w

        lhs, rhs = st.gradient_pullback_check(f, df, y)
        assert abs(lhs - rhs) <= 1e-5


def test_boundedness_probe_unweighted_first_expression():
    pr = st.boundedness_probe(3, 0.0, samples=5000)
    # exponent N-3+alpha = 0 makes the first expression identically 1
    assert pr.expr1_low == pytest.approx(1.0, abs=1e-15)
    assert pr.expr1_high == pytest.approx(1.0, abs=1e-15)
    assert 0.0 < pr.low <= pr.high < math.inf


def test_boundedness_probe_model_case():
    pr = st.boundedness_probe(2, -0.5, samples=50_000)
    assert 0.0 < pr.low <= pr.high < math.inf


def test_boundedness_probe_stable_in_sample_count():
    a = st.boundedness_probe(2, -0.5, samples=100_000)
    b = st.boundedness_probe(2, -0.5, samples=200_000, seed=987)
    assert abs(a.low - b.low) <= 0.01 * a.low
    assert abs(a.high - b.high) <= 0.01 * a.high
