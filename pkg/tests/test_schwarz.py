import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conformal_rmt.curve import ContourGrid, PolynomialCurve, contains_point, evaluate
from conformal_rmt.errors import (
    BranchAmbiguityError,
    DecompositionUndefinedError,
    OutsideAnalyticityError,
)
from conformal_rmt.inversion import DeformationSchedule, deform
from conformal_rmt.schwarz import (
    branch_point_check,
    critical_points,
    near_slit_decomposition,
    riemann_inverse,
    schwarz_function,
)

from conftest import CIRCLE, ELLIPSE, TRIFOLD, certified_curves


def ellipse_inverse(z, r=1.0, a1=0.5):
    # r w^2 - z w + a1 = 0, plus sign
    return z * (1 + np.sqrt(1 - 4 * r * a1 / z**2)) / (2 * r)


def test_riemann_inverse_examples():
    assert riemann_inverse(PolynomialCurve(2.0, [0]), 2j) == pytest.approx(1j, abs=1e-14)
    assert riemann_inverse(ELLIPSE, 2.0) == pytest.approx((2 + np.sqrt(2)) / 2, abs=1e-14)
    z = np.array([3.0, -2.5j, 1.2 + 1.9j])
    assert np.allclose(riemann_inverse(ELLIPSE, z), ellipse_inverse(z), atol=1e-13)


def test_schwarz_examples():
    assert schwarz_function(CIRCLE, 2.0) == pytest.approx(0.5, abs=1e-15)
    r = 1.7
    z = np.array([2.0, 3j, -4 + 1j])
    assert np.allclose(schwarz_function(PolynomialCurve(r, [0, 0]), z), r * r / z, atol=1e-14)
    H = ellipse_inverse(2.0)
    assert schwarz_function(ELLIPSE, 2.0) == pytest.approx(1 / H + 0.5 * H, abs=1e-14)
    assert schwarz_function(ELLIPSE, 2.0) == pytest.approx(1.43934, abs=1e-5)


def test_inverse_errors():
    with pytest.raises(OutsideAnalyticityError):
        riemann_inverse(ELLIPSE, 0.1)
    # at the critical value sqrt(2) the two preimages coincide at |w| = 1/sqrt(2)
    with pytest.raises(BranchAmbiguityError):
        riemann_inverse(ELLIPSE, np.sqrt(2) + 1e-9, collar_tol=0.5)


@given(certified_curves(), st.integers(0, 2**32 - 1))
def test_inverse_of_h_is_identity(curve, seed):
    rng = np.random.default_rng(seed)
    w = rng.uniform(1, 3, 64) * np.exp(2j * np.pi * rng.uniform(size=64))
    w[:8] = np.exp(2j * np.pi * rng.uniform(size=8))
    assert np.max(np.abs(riemann_inverse(curve, evaluate(curve, w)) - w)) <= 1e-10


@given(certified_curves())
def test_schwarz_property(curve):
    w = ContourGrid(512).nodes
    z = evaluate(curve, w)
    assert np.max(np.abs(schwarz_function(curve, z) - np.conj(z))) <= 1e-10


@given(certified_curves(n_max=4))
def test_schwarz_is_analytic_across_the_curve(curve):
    w = ContourGrid(64).nodes
    z = evaluate(curve, w)
    d = 1e-7 * max(curve.r, 0.1)
    fx = (schwarz_function(curve, z + d) - schwarz_function(curve, z - d)) / (2 * d)
    fy = (schwarz_function(curve, z + 1j * d) - schwarz_function(curve, z - 1j * d)) / (2 * d)
    cr = np.abs(fy - 1j * fx) / (1 + np.abs(fx))
    assert np.max(cr) < 1e-6


def test_decomposition_ellipse():
    dec = near_slit_decomposition(ELLIPSE, ContourGrid(512))
    assert dec.E == pytest.approx(1.25) and dec.Lambda == pytest.approx(-0.75)
    assert sorted(np.real(dec.branch_cut)) == pytest.approx([-np.sqrt(2), np.sqrt(2)])
    assert dec.remainder_bound < 1e-10
    r, a1 = 1.0, 0.5
    assert dec.E * 2 * r * a1 - (r**2 + abs(a1) ** 2) == pytest.approx(0)
    assert dec.Lambda * 2 * r * a1 - (abs(a1) ** 2 - r**2) == pytest.approx(0)
    # away from the curve the decomposition is the exact Schwarz function too
    z = np.array([3.0, 2j, -2 - 2j])
    assert np.allclose(dec.E * z + dec.Lambda * dec.sqrt_part(z), schwarz_function(ELLIPSE, z), atol=1e-13)


@given(st.floats(0.05, 2.0), st.floats(0.01, 0.99), st.floats(0, 2 * np.pi))
def test_decomposition_exact_for_degree_one(r, k, arg):
    c = PolynomialCurve(r, [0, r * k * np.exp(1j * arg)])
    assert near_slit_decomposition(c).remainder_bound <= 1e-10 * (1 + r)


def test_decomposition_slit_limit():
    r = 0.7
    dec = near_slit_decomposition(PolynomialCurve(r, [0, r * (1 - 1e-9)]))
    assert dec.E == pytest.approx(1, abs=1e-8) and dec.Lambda == pytest.approx(0, abs=1e-8)


def test_decomposition_remainder_decays_along_trajectory():
    sch = DeformationSchedule(0.05, 0.2, [0, 1, 0.8], [2.0, 2.0])
    traj = deform(sch, [1.0, 0.3, 0.1, 0.03, 0.01])
    rb = {round(p.s, 6): near_slit_decomposition(p.curve).remainder_bound for p in traj[2::2]}
    assert rb[0.01] / 0.01 < rb[0.1] / 0.1


def test_decomposition_requires_a1():
    with pytest.raises(DecompositionUndefinedError):
        near_slit_decomposition(TRIFOLD)


def test_branch_points_ellipse():
    rep = branch_point_check(ELLIPSE)
    assert sorted(np.abs(rep.critical_points)) == pytest.approx([2**-0.5] * 2)
    assert sorted(rep.branch_points.real) == pytest.approx([-np.sqrt(2), np.sqrt(2)])
    assert rep.count_inside == 2 and rep.even_count and not rep.touches_curve
    assert all(contains_point(ELLIPSE, b) for b in rep.branch_points)
    assert rep.critical_radius == pytest.approx(2**-0.5)


def test_branch_points_circle():
    rep = branch_point_check(PolynomialCurve(1.3, [0, 0]))
    assert rep.count_inside == 0 and rep.branch_points.size == 0 and rep.note


def test_branch_points_trifold():
    # h' = 1 - 0.6 w^-3 has three zeros inside the disk; each critical value is
    # a square-root branch point of S, so the count is n + 1 = 3 (odd).
    rep = branch_point_check(TRIFOLD)
    wc = critical_points(TRIFOLD)
    assert np.allclose(np.abs(wc), 0.6 ** (1 / 3))
    assert rep.count_inside == 3 and not rep.even_count and not rep.touches_curve
    assert "odd" in rep.note
    d = rep.to_dict()
    assert set(d) >= {"critical_points", "branch_points", "inside_flags", "critical_radius"}


@given(certified_curves(n_max=5))
def test_branch_points_never_on_curve(curve):
    rep = branch_point_check(curve)
    assert not rep.touches_curve
    assert rep.critical_radius < 1
