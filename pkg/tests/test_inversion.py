import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import brentq

from conformal_rmt.curve import PolynomialCurve, contains_point
from conformal_rmt.errors import (
    BreakdownError,
    DomainError,
    NearSingularError,
    OutOfRegimeError,
    ValidationError,
)
from conformal_rmt.inversion import (
    BlockSystem,
    DeformationSchedule,
    admissible_radius,
    asymptotic_residuals,
    deform,
    invert_near_slit,
    invert_regular,
    schedule_moments,
    solve_block_system,
)
from conformal_rmt.moments import HarmonicMoments, forward_moments


def dense_block_solve(K, v):
    """Stacked real system for J^-1 phi - K conj(phi) = v (the other block row is its conjugate)."""
    n1 = v.size
    Jinv = np.diag(1.0 / np.arange(1, n1 + 1))
    Kr, Ki = K.real, K.imag
    A = np.block([[Jinv - Kr, -Ki], [-Ki, Jinv + Kr]])
    xy = np.linalg.solve(A, np.concatenate([v.real, v.imag]))
    return xy[:n1] + 1j * xy[n1:]


def random_system(rng, n1, kmod):
    col = (rng.normal(size=n1) + 1j * rng.normal(size=n1)) * 0.5
    col[0] = kmod * np.exp(2j * np.pi * rng.uniform())
    v = rng.normal(size=n1) + 1j * rng.normal(size=n1)
    return BlockSystem.from_column(col, v)


# ---------------------------------------------------------------- block system


def test_block_system_examples(rng):
    v = rng.normal(size=4) + 1j * rng.normal(size=4)
    assert np.allclose(solve_block_system(BlockSystem(np.zeros((4, 4)), v)), np.arange(1, 5) * v)
    assert solve_block_system(BlockSystem.from_column([0.5], [1.0])) == pytest.approx(2.0)
    sys = random_system(rng, 4, 0.3)
    assert np.allclose(solve_block_system(sys), dense_block_solve(sys.K, sys.v), rtol=0, atol=1e-12)


@given(st.integers(1, 7), st.floats(0, 0.95), st.integers(0, 2**32 - 1))
def test_block_system_residuals(n1, kmod, seed):
    sys = random_system(np.random.default_rng(seed), n1, kmod)
    phi = solve_block_system(sys)
    r1, r2 = sys.residuals(phi)
    scale = 1 + np.max(np.abs(phi))
    assert np.max(np.abs(r1)) <= 1e-12 * scale and np.max(np.abs(r2)) <= 1e-12 * scale


def test_block_system_guards():
    with pytest.raises(NearSingularError):
        solve_block_system(BlockSystem.from_column([np.exp(0.3j)], [1.0]))
    K = np.zeros((2, 2))
    K[0, 1] = 1
    with pytest.raises(ValidationError):
        BlockSystem(K, [1, 1])


# ---------------------------------------------------------------- regular inversion


def test_invert_regular_examples():
    c = invert_regular(HarmonicMoments(0.75, [0, 0.25]))
    assert c.r == pytest.approx(1, abs=1e-12) and np.allclose(c.a, [0, 0.5], atol=1e-12)
    c = invert_regular(HarmonicMoments(0.3, [0, 0]))
    assert c.r == pytest.approx(np.sqrt(0.3), abs=1e-14) and np.allclose(c.a, 0, atol=1e-14)
    c = invert_regular(HarmonicMoments(0.82, [0, 0, 0.1]))
    assert c.r == pytest.approx(1, abs=1e-12) and np.allclose(c.a, [0, 0, 0.3], atol=1e-12)


def test_invert_regular_preconditions():
    with pytest.raises(OutOfRegimeError):
        invert_regular(HarmonicMoments(0.1, [0, 0.4995]))
    with pytest.raises(ValidationError):
        invert_regular(HarmonicMoments(None, [0, 0.1]))


@st.composite
def regular_moments(draw):
    n = draw(st.integers(1, 5))
    t2 = draw(st.floats(0, 0.4)) * np.exp(1j * draw(st.floats(0, 2 * np.pi)))
    rest = [
        draw(st.floats(0, 0.05)) * np.exp(1j * draw(st.floats(0, 2 * np.pi))) for _ in range(n - 1)
    ]
    t0 = draw(st.floats(1e-4, 1e-2))
    return HarmonicMoments(t0, [0, t2, *rest])


@given(regular_moments())
def test_regular_roundtrip(m):
    c = invert_regular(m)
    fm = forward_moments(c)
    assert abs(fm.t0 - m.t0) <= 1e-10 and np.max(np.abs(fm.t - m.t)) <= 1e-10
    assert c.xi > 0 and contains_point(c, 0)


def test_nonzero_t1_is_supported():
    m = HarmonicMoments(0.05, [0.01 - 0.02j, 0.2, 0.03j])
    fm = forward_moments(invert_regular(m))
    assert np.allclose(fm.t, m.t, atol=1e-12)


# ---------------------------------------------------------------- schedules


def test_admissible_radius_examples():
    r_hat, r_bar = admissible_radius([0, 1])
    assert r_hat == pytest.approx(1 / (2 * np.sqrt(2))) and r_bar == np.inf
    _, r_bar = admissible_radius([0, 1, 1])
    oracle = brentq(lambda r: r / 2 - 6 * r**2, 1e-6, 1)
    assert r_bar == pytest.approx(oracle) and r_bar == pytest.approx(1 / 12)
    big = min(admissible_radius([0, 1, 1e-3, 1e-3]))
    small = min(admissible_radius([0, 1, 1, 1]))
    assert big > small
    with pytest.raises(ValidationError):
        admissible_radius([0, 0.9])


def test_schedule_validation():
    with pytest.raises(ValidationError):
        DeformationSchedule(0.1, 0, [0.1, 1], [1.0])
    with pytest.raises(ValidationError):
        DeformationSchedule(0.1, 0, [0, 1.1], [1.0])
    with pytest.raises(ValidationError):
        DeformationSchedule(0.1, 0, [0, 1, 1], [1.0, 0.5])
    with pytest.warns(UserWarning):
        DeformationSchedule(0.5, 0, [0, 1], [1.0])


def test_schedule_moments_examples():
    sch = DeformationSchedule(0.05, 0.4, [0, 1, 0.5j], [1.0, 2.0])
    m = schedule_moments(sch, 1.0)
    assert m.t0 is None and m.tj(2) == 0 and m.tj(3) == 0.5j
    assert schedule_moments(DeformationSchedule(0.05, 0, [0, 1], [1.0]), 0.75).tj(2) == pytest.approx(0.25)
    m = schedule_moments(sch, 1e-12)
    assert abs(m.tj(2) - 0.5) < 1e-11 and abs(m.tj(3)) < 1e-20
    for bad in (0.0, 1.5):
        with pytest.raises(DomainError):
            schedule_moments(sch, bad)


# ---------------------------------------------------------------- deformation


def test_deform_ellipse_family():
    r = 0.3
    s = np.array([0.9, 0.5, 0.1, 0.01, 1e-3])
    traj = deform(DeformationSchedule(r, 0.0, [0, 1], [1.0]), s)
    alpha1 = np.array([p.curve.alpha[1] for p in traj])
    assert np.allclose(alpha1, np.sqrt(1 - s), atol=1e-12)
    assert np.allclose([p.moments.t0 for p in traj], r**2 * s, atol=1e-14)
    assert all(p.xi > 0 for p in traj)


def test_deform_degree_three_reaches_small_s():
    sch = DeformationSchedule(0.05, 0.3, [0, 1, 1], [2.0, 2.0])
    s = np.geomspace(1, 1e-3, 13)
    traj = deform(sch, s)
    assert traj[-1].s == pytest.approx(1e-3)
    assert all(p.xi > 0 for p in traj)
    t0 = np.array([p.moments.t0 for p in traj])
    assert np.all(np.diff(t0) < 0)
    # slit-limit asymptotics: alpha_1 - (1 - s_eff/2) and alpha_j / s vanish
    res = [asymptotic_residuals(p) for p in traj]
    dev = np.array([q["alpha1_dev"] for q in res])
    aj = np.array([q["alphaj_over_s"] for q in res])
    assert np.all(np.diff(dev[3:]) < 0) and dev[-1] < 1e-6
    assert np.all(np.diff(aj) < 0) and aj[-1] < 1e-2
    # alpha_0 is O(rho s) rather than o(s): bounded by a multiple of rho
    a0 = np.array([q["alpha0_over_s"] for q in res])
    assert np.all(a0 <= 20 * sch.r**2)


def test_deform_rejects_bad_s():
    sch = DeformationSchedule(0.05, 0, [0, 1], [1.0])
    with pytest.raises(ValidationError):
        deform(sch, [0.5, 0.7])
    with pytest.raises(DomainError):
        deform(sch, [1.2, 0.5])


def test_frozen_t2_schedule_breaks_down():
    r = 0.05
    sch = DeformationSchedule(r, 0.0, [0, 1, 1], [1.0, 1.0], freeze_t2=True)
    s = np.linspace(1, 0.01, 12)
    with pytest.raises(BreakdownError) as info:
        deform(sch, s)
    e = info.value
    assert e.s is not None and e.s > 1e-2
    # up to the failure the curve follows a_2 = r sqrt((1 - s)/2)
    for p in e.trajectory:
        assert p.curve.a[2].real == pytest.approx(r * np.sqrt((1 - p.s) / 2), abs=1e-14)
        assert p.moments.t0 == pytest.approx(r**2 * p.s, abs=1e-15)
    assert PolynomialCurve(r, [0, 0, r / 2]).xi == 0


# ---------------------------------------------------------------- near-slit inversion


def test_near_slit_matches_regular_for_ellipse():
    sch = DeformationSchedule(1.0, 0.0, [0, 1], [1.0])
    m = HarmonicMoments(0.75, [0, 0.25])
    c = invert_near_slit(m, sch)
    assert np.allclose(c.a, invert_regular(m).a, atol=1e-10)
    assert c.a[1].real == pytest.approx(0.5, abs=1e-10)


def test_near_slit_roundtrip_degree_three():
    sch = DeformationSchedule(0.05, 0.0, [0, 1, 1], [2.0, 2.0])
    c = invert_near_slit(HarmonicMoments(1e-4, [0, 0, 0]), sch, match_t=False)
    fm = forward_moments(c)
    s = 1 - 4 * abs(fm.tj(2)) ** 2
    want = schedule_moments(sch, s)
    assert abs(fm.t0 - 1e-4) <= 1e-8
    assert np.max(np.abs(fm.t - want.t)) <= 1e-8
    # and the consistency check accepts the reproduced moments
    c2 = invert_near_slit(fm, sch)
    assert np.allclose(c2.a, c.a, atol=1e-8)


def test_near_slit_slit_limit():
    sch = DeformationSchedule(0.05, 0.0, [0, 1, 0.5], [2.0, 2.0])
    c = invert_near_slit(HarmonicMoments(1e-7, [0, 0, 0]), sch, match_t=False)
    al = c.alpha
    assert abs(al[1] - 1) < 1e-4 and abs(al[2]) < 1e-4 and abs(al[0]) < 1e-4


def test_near_slit_regime_errors():
    sch = DeformationSchedule(0.05, 0.0, [0, 1, 1], [2.0, 2.0])
    with pytest.raises(OutOfRegimeError):
        invert_near_slit(HarmonicMoments(1.0, [0, 0, 0]), sch, match_t=False)
    with pytest.raises(OutOfRegimeError):
        invert_near_slit(HarmonicMoments(1e-4, [0, 0.3, 0.2]), sch)


@pytest.mark.parametrize("s", [0.5, 0.35, 0.2])
def test_cross_parametrization(s):
    sch = DeformationSchedule(0.05, 0.7, [0, 1, 0.6 + 0.8j, -1j], [1.5, 2.0, 3.0])
    m = forward_moments(deform(sch, [1.0, s])[-1].curve)
    assert 0.35 <= abs(m.tj(2)) <= 0.45
    a = invert_regular(m)
    b = invert_near_slit(m, sch)
    assert abs(a.r - b.r) <= 1e-8 and np.max(np.abs(a.a - b.a)) <= 1e-8
