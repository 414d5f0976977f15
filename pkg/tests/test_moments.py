import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conformal_rmt.curve import ContourGrid, PolynomialCurve, area_t0
from conformal_rmt.errors import PrecisionError, UncertifiedCurveError
from conformal_rmt.moments import (
    HarmonicMoments,
    forward_moments,
    forward_moments_quadrature,
    leading_order_moments,
    moment_jacobian,
    raw_moments,
)

from conftest import CIRCLE, ELLIPSE, TRIFOLD, certified_curves, random_curve


def agree(x, y, rel=1e-10, floor=1e-12):
    x, y = np.asarray(x), np.asarray(y)
    return np.all(np.abs(x - y) <= np.maximum(rel * np.abs(y), floor))


def test_forward_examples():
    m = forward_moments(PolynomialCurve(1, [0, 0]))
    assert m.t0 == 1 and np.all(m.t == 0) and m.t.size == 2
    m = forward_moments(ELLIPSE)
    assert m.t0 == pytest.approx(0.75, abs=1e-15)
    assert m.tj(1) == pytest.approx(0, abs=1e-15)
    assert m.tj(2) == pytest.approx(0.25, abs=1e-15)
    m = forward_moments(TRIFOLD)
    assert m.t0 == pytest.approx(0.82, abs=1e-15)
    assert np.allclose(m.t, [0, 0, 0.1], atol=1e-15)


def test_quadrature_examples(rng):
    assert np.allclose(forward_moments_quadrature(CIRCLE).t, 0, atol=1e-12)
    # an explicit coarse grid is used as given
    coarse = forward_moments_quadrature(ELLIPSE, ContourGrid(16)).tj(2)
    assert abs(coarse - 0.25) > 1e-6
    assert forward_moments_quadrature(ELLIPSE).tj(2) == pytest.approx(0.25, abs=1e-12)
    c = random_curve(rng, n_max=4)
    while c.n != 4:
        c = random_curve(rng, n_max=4)
    assert agree(forward_moments_quadrature(c).t, forward_moments(c).t)


def test_preconditions():
    with pytest.raises(UncertifiedCurveError):
        forward_moments(PolynomialCurve(1, [0, 0, 0.6]))
    # certified but the origin lies outside: the expansion of 1/h is invalid
    with pytest.raises(PrecisionError):
        forward_moments(PolynomialCurve(1, [2.0, 0.1]))
    with pytest.raises(PrecisionError):
        forward_moments_quadrature(PolynomialCurve(1, [2.0, 0.1]))


def test_leading_order_examples():
    x = 0.3 - 0.2j
    r = 1e-8
    lo = leading_order_moments(PolynomialCurve(r, [0, x * r]))
    assert lo.tj(2) == pytest.approx(np.conj(x) / 2, abs=1e-15)
    c = PolynomialCurve(0.1, [0, 0.005])
    lo, ex = leading_order_moments(c), forward_moments(c)
    assert lo.tj(2) == pytest.approx(0.025, abs=1e-12)
    assert np.max(np.abs(lo.t - ex.t)) <= 1e-4
    assert np.all(leading_order_moments(CIRCLE).t == 0)


def test_leading_order_error_is_second_order():
    alpha = np.array([0.02, 0.1, 0.05j, 0.03])
    errs = []
    for r in [0.2, 0.1, 0.05]:
        # alpha_0 is itself O(rho) in the perturbative regime
        c = PolynomialCurve.from_scaled(r * r, alpha * np.array([r * r, 1, 1, 1]))
        errs.append(np.max(np.abs(leading_order_moments(c).t - forward_moments(c).t)))
    ratios = np.array(errs[:-1]) / np.array(errs[1:])
    assert np.all(ratios > 12)  # rho^2 gives 16 per halving of r


@given(certified_curves(n_max=6, alpha_max=0.2))
def test_exact_matches_quadrature(curve):
    assert agree(forward_moments_quadrature(curve).t, forward_moments(curve).t)


@given(certified_curves())
def test_t0_is_area_formula(curve):
    assert forward_moments(curve).t0 == area_t0(curve)


@given(certified_curves(), st.floats(0, 2 * np.pi))
def test_rotation_covariance(curve, theta):
    j = np.arange(curve.n + 1)
    rot = PolynomialCurve(curve.r, curve.a * np.exp(1j * (j + 1) * theta))
    t, t_rot = forward_moments(curve).t, forward_moments(rot).t
    jj = np.arange(1, curve.n + 2)
    assert np.allclose(t_rot, np.exp(-1j * jj * theta) * t, atol=1e-13)


@given(certified_curves())
def test_real_symmetric_curves_have_real_moments(curve):
    real = PolynomialCurve(curve.r, curve.a.real)
    if not real.certified:
        return
    assert np.max(np.abs(forward_moments(real).t.imag)) < 1e-12


def test_jacobian_matches_finite_differences(rng):
    c = random_curve(rng, n_max=4)
    n = c.n

    def vec(r, a):
        cc = PolynomialCurve(r, a)
        return np.concatenate([[area_t0(cc)], raw_moments(cc)])

    dr, da, dab = moment_jacobian(c)
    h = 1e-6
    num = (vec(c.r + h, c.a) - vec(c.r - h, c.a)) / (2 * h)
    assert np.allclose(num, dr, atol=1e-8)
    for k in range(n + 1):
        e = np.zeros(n + 1, complex)
        e[k] = h
        dx = (vec(c.r, c.a + e) - vec(c.r, c.a - e)) / (2 * h)
        dy = (vec(c.r, c.a + 1j * e) - vec(c.r, c.a - 1j * e)) / (2 * h)
        assert np.allclose(dx, da[:, k] + dab[:, k], atol=1e-8)
        assert np.allclose(dy, 1j * (da[:, k] - dab[:, k]), atol=1e-8)


def test_serialization_roundtrip():
    m = forward_moments(TRIFOLD)
    back = HarmonicMoments.from_dict(m.to_dict())
    assert back.t0 == m.t0 and np.array_equal(back.t, m.t)
    assert HarmonicMoments(None, [0, 0.1]).t0 is None
    with pytest.raises(ValueError):
        HarmonicMoments(-1.0, [0, 0])
